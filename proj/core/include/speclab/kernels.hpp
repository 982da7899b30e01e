#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "speclab/errors.hpp"

namespace speclab {

enum class KernelKind {
    Indicator,      // 1 for t <= 1, 0 otherwise
    TruncGaussian,  // exp(-t^2) for t <= 3, 0 otherwise
    Quadratic,      // (1 - t^2)_+
};

KernelKind kernel_kind_from_name(const std::string& name);
std::string kernel_name(KernelKind kind);

/// Radial kernel profile. Dimension-independent; the support radius bounds
/// the neighbor search when building graphs.
class RadialKernel {
public:
    explicit RadialKernel(KernelKind kind) : kind_(kind) {}

    KernelKind kind() const { return kind_; }

    /// Profile value at radial coordinate t >= 0.
    double profile(double t) const;

    /// Radius beyond which the profile vanishes.
    double support_radius() const;

    /// eta_eps(z) = eps^{-d} * profile(|z|/eps) for a displacement of length |z|.
    double eval_scaled(int dim, double eps, double z_norm) const;

    bool operator==(const RadialKernel& o) const { return kind_ == o.kind_; }

private:
    KernelKind kind_;
};

/// The two constants that appear in every convergence limit, for one (kernel, d).
struct KernelConstants {
    double surface_tension = 0.0;  // integral of eta(h) h_1^2 over R^d
    double total_mass = 0.0;       // integral of eta(h) over R^d
};

/// surface tension, by deterministic quadrature of the radial reduction
/// (1/d) * S_{d-1} * int_0^inf profile(r) r^{d+1} dr.
double surface_tension(const RadialKernel& kernel, int dim);

/// total kernel mass, S_{d-1} * int_0^inf profile(r) r^{d-1} dr.
double total_mass(const RadialKernel& kernel, int dim);

KernelConstants kernel_constants(const RadialKernel& kernel, int dim);

/// Outcome of checking the admissibility conditions on a radial profile.
struct KernelConditionReport {
    bool k1_positive_at_zero = false;
    bool k2_nonincreasing = false;
    bool k3_integrable = false;
    std::vector<std::string> failures;
    bool all_pass() const { return k1_positive_at_zero && k2_nonincreasing && k3_integrable; }
};

/// Check K1-K3 for an arbitrary profile function; used both for the built-in
/// kernels and for constructed counterexamples in tests.
template <typename Profile>
KernelConditionReport validate_profile(Profile&& profile, int dim, double probe_radius);

KernelConditionReport validate_conditions(const RadialKernel& kernel, int dim);

namespace detail {
/// Surface area of the unit sphere S^{d-1} for d in {1,2,3}.
double sphere_area(int dim);
/// Adaptive Simpson quadrature on [a,b].
double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol);
} // namespace detail

template <typename Profile>
KernelConditionReport validate_profile(Profile&& profile, int dim, double probe_radius) {
    KernelConditionReport report;
    report.k1_positive_at_zero = profile(0.0) > 0.0;
    if (!report.k1_positive_at_zero) report.failures.push_back("K1: profile(0) <= 0");

    // K2: sampled monotonicity on a fine grid
    const int samples = 10000;
    report.k2_nonincreasing = true;
    double prev = profile(0.0);
    for (int i = 1; i <= samples; ++i) {
        const double t = probe_radius * static_cast<double>(i) / samples;
        const double v = profile(t);
        if (v > prev * (1.0 + 1e-12) + 1e-15) {
            report.k2_nonincreasing = false;
            report.failures.push_back("K2: profile increases near t=" + std::to_string(t));
            break;
        }
        prev = v;
    }

    // K3: integral of profile(r) r^{d+1} must converge; detect divergence by
    // comparing tail contributions over doubling cutoffs.
    auto weighted = [&](double r) { return profile(r) * std::pow(r, dim + 1); };
    double cutoff = std::max(probe_radius, 1.0);
    double total = detail::integrate(weighted, 0.0, cutoff, 1e-9);
    report.k3_integrable = true;
    for (int round = 0; round < 12; ++round) {
        const double tail = detail::integrate(weighted, cutoff, 2.0 * cutoff, 1e-9);
        cutoff *= 2.0;
        if (tail <= 1e-12 * std::max(total, 1e-300)) break;
        total += tail;
        if (round == 11) {
            report.k3_integrable = false;
            report.failures.push_back("K3: tail of profile(r) r^{d+1} does not decay");
        }
    }
    return report;
}

} // namespace speclab
