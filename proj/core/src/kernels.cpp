#include "speclab/kernels.hpp"

#include <map>
#include <mutex>

namespace speclab {

KernelKind kernel_kind_from_name(const std::string& name) {
    if (name == "indicator") return KernelKind::Indicator;
    if (name == "gaussian" || name == "trunc_gaussian") return KernelKind::TruncGaussian;
    if (name == "quadratic") return KernelKind::Quadratic;
    throw InvalidArgument("unknown kernel name: " + name);
}

std::string kernel_name(KernelKind kind) {
    switch (kind) {
        case KernelKind::Indicator: return "indicator";
        case KernelKind::TruncGaussian: return "gaussian";
        case KernelKind::Quadratic: return "quadratic";
    }
    throw InternalError("unreachable kernel kind");
}

double RadialKernel::profile(double t) const {
    switch (kind_) {
        case KernelKind::Indicator:
            return t <= 1.0 ? 1.0 : 0.0;
        case KernelKind::TruncGaussian:
            return t <= 3.0 ? std::exp(-t * t) : 0.0;
        case KernelKind::Quadratic: {
            const double v = 1.0 - t * t;
            return v > 0.0 ? v : 0.0;
        }
    }
    throw InternalError("unreachable kernel kind");
}

double RadialKernel::support_radius() const {
    switch (kind_) {
        case KernelKind::Indicator: return 1.0;
        case KernelKind::TruncGaussian: return 3.0;
        case KernelKind::Quadratic: return 1.0;
    }
    throw InternalError("unreachable kernel kind");
}

double RadialKernel::eval_scaled(int dim, double eps, double z_norm) const {
    if (eps <= 0.0) throw InvalidArgument("eval_scaled: eps must be positive");
    const double t = z_norm / eps;
    if (t > support_radius()) return 0.0;
    return profile(t) / std::pow(eps, dim);
}

namespace detail {

double sphere_area(int dim) {
    switch (dim) {
        case 1: return 2.0;                       // two endpoints of S^0
        case 2: return 2.0 * M_PI;
        case 3: return 4.0 * M_PI;
    }
    throw InvalidArgument("dimension must be 1, 2 or 3");
}

namespace {
double simpson(const std::function<double(double)>& f, double a, double fa, double b, double fb,
               double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive(const std::function<double(double)>& f, double a, double fa, double b, double fb,
                double fm, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(f, a, fa, m, fm, flm);
    const double right = simpson(f, m, fm, b, fb, frm);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
        return left + right + (left + right - whole) / 15.0;
    }
    return adaptive(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1) +
           adaptive(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1);
}
} // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
    if (b <= a) return 0.0;
    // split the range so discontinuities at interior points are localized
    const int pieces = 16;
    double total = 0.0;
    const double h = (b - a) / pieces;
    for (int i = 0; i < pieces; ++i) {
        const double x0 = a + i * h, x1 = x0 + h;
        const double f0 = f(x0), f1 = f(x1), fm = f(0.5 * (x0 + x1));
        const double whole = simpson(f, x0, f0, x1, f1, fm);
        total += adaptive(f, x0, f0, x1, f1, fm, whole, rel_tol * std::max(std::abs(whole), 1e-12), 40);
    }
    return total;
}

} // namespace detail

double surface_tension(const RadialKernel& kernel, int dim) {
    const double area = detail::sphere_area(dim);
    const double radius = kernel.support_radius();
    auto f = [&](double r) { return kernel.profile(r) * std::pow(r, dim + 1); };
    const double radial = detail::integrate(f, 0.0, radius, 1e-10);
    const double value = area / dim * radial;
    if (!std::isfinite(value) || value <= 0.0) {
        throw ConfigError("surface tension is not a positive finite number; kernel violates K1-K3");
    }
    return value;
}

double total_mass(const RadialKernel& kernel, int dim) {
    const double area = detail::sphere_area(dim);
    const double radius = kernel.support_radius();
    auto f = [&](double r) { return kernel.profile(r) * std::pow(r, dim - 1); };
    const double radial = detail::integrate(f, 0.0, radius, 1e-10);
    const double value = area * radial;
    if (!std::isfinite(value) || value <= 0.0) {
        throw ConfigError("kernel total mass is not a positive finite number");
    }
    return value;
}

KernelConstants kernel_constants(const RadialKernel& kernel, int dim) {
    // computed once per (kernel, dimension)
    static std::map<std::pair<int, int>, KernelConstants> cache;
    static std::mutex mutex;
    const auto key = std::make_pair(static_cast<int>(kernel.kind()), dim);
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    KernelConstants constants{surface_tension(kernel, dim), total_mass(kernel, dim)};
    cache.emplace(key, constants);
    return constants;
}

KernelConditionReport validate_conditions(const RadialKernel& kernel, int dim) {
    return validate_profile([&](double t) { return kernel.profile(t); }, dim,
                            kernel.support_radius());
}

} // namespace speclab
