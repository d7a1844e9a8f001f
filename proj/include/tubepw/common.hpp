#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tubepw {

using cplx = std::complex<double>;
using rvec = std::vector<double>;
using cvec = std::vector<cplx>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

enum class errc {
    zero_generator,
    dimension_mismatch,
    unsupported_non_simplicial,
    cone_not_salient,
    non_convergence,
    out_of_domain,
    ball_not_in_domain,
    divergent_slice,
    truncation_too_small,
    slice_tail_too_large,
    not_in_base,
    bad_basis,
    bad_parameters,
    alpha_out_of_range,
    kernel_divergence,
    divergent_norm,
    hardy_littlewood_unbounded,
    insufficient_decay_window,
    support_not_in_k,
    config_parse,
    unresolved_reference,
    io_error,
};

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::zero_generator: return "ZeroGenerator";
        case errc::dimension_mismatch: return "DimensionMismatch";
        case errc::unsupported_non_simplicial: return "UnsupportedNonSimplicial";
        case errc::cone_not_salient: return "ConeNotSalient";
        case errc::non_convergence: return "NonConvergence";
        case errc::out_of_domain: return "OutOfDomain";
        case errc::ball_not_in_domain: return "BallNotInDomain";
        case errc::divergent_slice: return "DivergentSlice";
        case errc::truncation_too_small: return "TruncationTooSmall";
        case errc::slice_tail_too_large: return "SliceTailTooLarge";
        case errc::not_in_base: return "NotInBase";
        case errc::bad_basis: return "BadBasis";
        case errc::bad_parameters: return "BadParameters";
        case errc::alpha_out_of_range: return "AlphaOutOfRange";
        case errc::kernel_divergence: return "KernelDivergence";
        case errc::divergent_norm: return "DivergentNorm";
        case errc::hardy_littlewood_unbounded: return "HardyLittlewoodUnbounded";
        case errc::insufficient_decay_window: return "InsufficientDecayWindow";
        case errc::support_not_in_k: return "SupportNotInK";
        case errc::config_parse: return "ConfigParse";
        case errc::unresolved_reference: return "UnresolvedReference";
        case errc::io_error: return "IoError";
    }
    return "UnknownError";
}

class Error : public std::runtime_error {
  public:
    Error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
    errc code() const { return code_; }

  private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, errc code, const std::string& what) {
    if (!ok) fail(code, what);
}

// ---- small dense vector helpers (n <= 3 throughout) ----

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline rvec scaled(std::span<const double> a, double c) {
    rvec r(a.begin(), a.end());
    for (double& v : r) v *= c;
    return r;
}

inline rvec normalized(std::span<const double> a) {
    double n = norm2(a);
    return scaled(a, 1.0 / n);
}

inline rvec vadd(std::span<const double> a, std::span<const double> b) {
    rvec r(a.begin(), a.end());
    for (std::size_t i = 0; i < b.size(); ++i) r[i] += b[i];
    return r;
}

inline rvec vsub(std::span<const double> a, std::span<const double> b) {
    rvec r(a.begin(), a.end());
    for (std::size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
    return r;
}

inline double dist2(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

inline cplx cdot(std::span<const cplx> a, std::span<const double> b) {
    cplx s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Fixed-order pairwise reduction; every norm/energy sum in the library routes
// through this so reruns are bit-identical regardless of value magnitudes.
template <typename T>
T pairwise_sum(std::span<const T> v) {
    if (v.size() <= 8) {
        T s{};
        for (const T& x : v) s += x;
        return s;
    }
    std::size_t half = v.size() / 2;
    return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

inline double psum(const rvec& v) { return pairwise_sum(std::span<const double>(v)); }
inline cplx psum(const cvec& v) { return pairwise_sum(std::span<const cplx>(v)); }

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace tubepw
