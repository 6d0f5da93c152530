#ifndef TPI_RNG_HPP
#define TPI_RNG_HPP

// Counter-based random streams for reproducible shot sampling.
//
// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as 1, 2,
// 3", SC'11): a bijective keyed permutation of a 128-bit counter.  A stream
// is keyed by (seed, stream index); draws within a stream advance a 64-bit
// block counter.  Because each stream is addressed rather than advanced from
// a shared state, per-shot streams produce identical draws no matter how
// shots are partitioned across workers.
//
// On top of the raw generator: uniforms on (0, 1), standard normals
// (Box-Muller, pair-cached), wrapped normals on (-pi, pi], and von Mises
// variates (Best-Fisher rejection).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace tpi::rng {

class Philox {
  public:
    Philox(std::uint64_t seed, std::uint64_t stream) {
        key_[0] = static_cast<std::uint32_t>(seed);
        key_[1] = static_cast<std::uint32_t>(seed >> 32);
        counter_[0] = 0;
        counter_[1] = 0;
        counter_[2] = static_cast<std::uint32_t>(stream);
        counter_[3] = static_cast<std::uint32_t>(stream >> 32);
    }

    std::uint32_t next_u32() {
        if (cursor_ == 4) refill();
        return block_[cursor_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return lo | (hi << 32);
    }

    // Uniform on the open interval (0, 1): 53-bit grid offset by half a
    // step, so 0 and 1 are unreachable and log() is always safe.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; the paired variate is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double t = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

    // N(0, sd^2) reduced modulo 2 pi onto (-pi, pi].
    double wrapped_normal(double sd) {
        const double x = sd * normal();
        const double two_pi = 2.0 * std::numbers::pi;
        double w = x - two_pi * std::round(x / two_pi);
        if (w <= -std::numbers::pi) w += two_pi;
        return w;
    }

    // Von Mises with mean 0 and concentration kappa, by the Best-Fisher
    // envelope-rejection method (acceptance >= ~65% for every kappa).
    double von_mises(double kappa) {
        if (kappa < 1e-12) // indistinguishable from the uniform circle
            return std::numbers::pi * (2.0 * uniform() - 1.0);
        const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
        const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
        const double r = (1.0 + rho * rho) / (2.0 * rho);
        for (;;) {
            const double z = std::cos(std::numbers::pi * uniform());
            const double f = (1.0 + r * z) / (r + z);
            const double c = kappa * (r - f);
            const double u = uniform();
            if (c * (2.0 - c) - u > 0.0 || std::log(c / u) + 1.0 - c >= 0.0) {
                const double angle = std::acos(std::clamp(f, -1.0, 1.0));
                return uniform() < 0.5 ? -angle : angle;
            }
        }
    }

  private:
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    static constexpr std::uint32_t kMult0 = 0xD2511F53u;
    static constexpr std::uint32_t kMult1 = 0xCD9E8D57u;

    static void mul_hi_lo(std::uint32_t a, std::uint32_t b,
                          std::uint32_t& lo, std::uint32_t& hi) {
        const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
        lo = static_cast<std::uint32_t>(p);
        hi = static_cast<std::uint32_t>(p >> 32);
    }

    static void round_once(std::array<std::uint32_t, 4>& c,
                           const std::array<std::uint32_t, 2>& k) {
        std::uint32_t lo0, hi0, lo1, hi1;
        mul_hi_lo(kMult0, c[0], lo0, hi0);
        mul_hi_lo(kMult1, c[2], lo1, hi1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }

    void refill() {
        std::array<std::uint32_t, 4> c = counter_;
        std::array<std::uint32_t, 2> k = key_;
        for (int i = 0; i < 10; ++i) {
            if (i > 0) {
                k[0] += kWeyl0;
                k[1] += kWeyl1;
            }
            round_once(c, k);
        }
        block_ = c;
        cursor_ = 0;
        if (++counter_[0] == 0) ++counter_[1]; // 64-bit block counter
    }

    std::array<std::uint32_t, 4> counter_{};
    std::array<std::uint32_t, 4> block_{};
    std::array<std::uint32_t, 2> key_{};
    int cursor_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace tpi::rng

#endif // TPI_RNG_HPP
