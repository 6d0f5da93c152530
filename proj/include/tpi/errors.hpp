#ifndef TPI_ERRORS_HPP
#define TPI_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tpi {

// Base class for all errors raised by this library.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// A Gaussian elimination step was requested for a variable whose effective
// quadratic coefficient has non-positive real part (or the integral has no
// damping at all); the integral over the real line does not converge.
class NonConvergentIntegral : public error {
public:
    explicit NonConvergentIntegral(const std::string& msg) : error(msg) {}
};

// evaluate() was called with a free variable missing from the assignment.
class UnboundVariable : public error {
public:
    explicit UnboundVariable(const std::string& msg) : error(msg) {}
};

// An adaptive quadrature rule hit its node/depth cap before the requested
// tolerance was reached.
class QuadratureNotConverged : public error {
public:
    explicit QuadratureNotConverged(const std::string& msg) : error(msg) {}
};

// The brute-force oracle was asked for a tensor integral of dimension above
// its hard cap.
class DimensionTooHigh : public error {
public:
    explicit DimensionTooHigh(const std::string& msg) : error(msg) {}
};

// The brute-force oracle converged formally but its error estimate exceeds
// the requested tolerance.
class ToleranceNotMet : public error {
public:
    explicit ToleranceNotMet(const std::string& msg) : error(msg) {}
};

// Cramér-Rao bound requested where the Fisher information is exactly zero.
class ZeroInformation : public error {
public:
    explicit ZeroInformation(const std::string& msg) : error(msg) {}
};

// A noise-halving threshold was requested along an axis the protocol does not
// decay on (e.g. a theta sweep of a protocol with no theta dependence).
class NoDecayAxis : public error {
public:
    explicit NoDecayAxis(const std::string& msg) : error(msg) {}
};

// Maximum-likelihood estimation failed because every hypothesis in the search
// window has the same likelihood to within tolerance.
class FlatLikelihood : public error {
public:
    explicit FlatLikelihood(const std::string& msg) : error(msg) {}
};

// CLI: unknown figure / table identifier.
class UnknownFigure : public error {
public:
    explicit UnknownFigure(const std::string& msg) : error(msg) {}
};

class UnknownTable : public error {
public:
    explicit UnknownTable(const std::string& msg) : error(msg) {}
};

} // namespace tpi

#endif // TPI_ERRORS_HPP
