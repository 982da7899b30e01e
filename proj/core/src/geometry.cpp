#include "speclab/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "speclab/rng.hpp"

namespace speclab {

Domain::Domain(int d, std::array<double, 3> a, std::array<double, 3> b) : dim(d), lo(a), hi(b) {
    if (d < 1 || d > 3) throw InvalidArgument("domain dimension must be 1, 2 or 3");
    for (int i = 0; i < d; ++i) {
        if (!(lo[i] < hi[i])) throw InvalidArgument("domain bounds must satisfy lo < hi");
    }
}

Domain Domain::unit_box(int d) {
    return Domain(d, {0.0, 0.0, 0.0}, {1.0, 1.0, 1.0});
}

double Domain::volume() const {
    double v = 1.0;
    for (int i = 0; i < dim; ++i) v *= side(i);
    return v;
}

double Domain::diameter() const {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += side(i) * side(i);
    return std::sqrt(s);
}

bool Domain::contains(const Eigen::VectorXd& x) const {
    if (x.size() != dim) return false;
    for (int i = 0; i < dim; ++i) {
        if (x[i] < lo[i] || x[i] > hi[i]) return false;
    }
    return true;
}

DensityField::DensityField(const Domain& domain, DensityKind kind)
    : domain_(domain), kind_(kind) {}

double DensityField::raw(const Eigen::VectorXd& x) const {
    switch (kind_) {
        case DensityKind::Uniform:
            return 1.0;
        case DensityKind::Affine:
            return c0_ + coeff_.dot(x);
        case DensityKind::GaussianBump: {
            double bump = 1.0;
            for (int i = 0; i < domain_.dim; ++i) {
                const double z = (x[i] - center_a_[i]) / width_;
                bump *= std::exp(-0.5 * z * z);
            }
            return floor_ + amplitude_ * bump;
        }
        case DensityKind::TwoBlob: {
            double bump_a = 1.0, bump_b = 1.0;
            for (int i = 0; i < domain_.dim; ++i) {
                const double za = (x[i] - center_a_[i]) / width_;
                const double zb = (x[i] - center_b_[i]) / width_;
                bump_a *= std::exp(-0.5 * za * za);
                bump_b *= std::exp(-0.5 * zb * zb);
            }
            return floor_ + amplitude_ * (bump_a + bump_b);
        }
    }
    throw InternalError("unreachable density kind");
}

void DensityField::normalize_and_bound() {
    const Domain& dom = domain_;
    // Fine midpoint grid: exact for uniform/affine means, accurate for smooth bumps.
    const int res = dom.dim == 1 ? 20000 : (dom.dim == 2 ? 512 : 96);
    std::array<int, 3> counts{1, 1, 1};
    for (int i = 0; i < dom.dim; ++i) counts[i] = res;
    const long total = static_cast<long>(counts[0]) * counts[1] * counts[2];
    double cell = dom.volume() / static_cast<double>(total);
    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    Eigen::VectorXd x(dom.dim);
    for (int a = 0; a < counts[0]; ++a) {
        for (int b = 0; b < counts[1]; ++b) {
            for (int c = 0; c < counts[2]; ++c) {
                const int idx[3] = {a, b, c};
                for (int i = 0; i < dom.dim; ++i) {
                    x[i] = dom.lo[i] + (idx[i] + 0.5) * dom.side(i) / counts[i];
                }
                const double v = raw(x);
                sum += v * cell;
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
    }
    if (!(lo > 0.0)) throw ConfigError("density is not bounded away from zero on the box");
    norm_ = sum;
    lower_ = lo / norm_;
    upper_ = hi / norm_;
    if (upper_ / lower_ > 1e6) {
        throw ConfigError("density bound ratio M/m exceeds 1e6; rejection sampling would stall");
    }
}

double DensityField::operator()(const Eigen::VectorXd& x) const {
    return raw(x) / norm_;
}

DensityField DensityField::uniform(const Domain& domain) {
    DensityField f(domain, DensityKind::Uniform);
    f.norm_ = domain.volume();
    f.lower_ = f.upper_ = 1.0 / f.norm_;
    return f;
}

DensityField DensityField::affine(const Domain& domain, double c0, const Eigen::VectorXd& c) {
    if (c.size() != domain.dim) throw InvalidArgument("affine coefficient size must equal dim");
    DensityField f(domain, DensityKind::Affine);
    f.c0_ = c0;
    f.coeff_ = c;
    // exact normalization: integral of (c0 + c.x) over the box
    double integral = c0 * domain.volume();
    for (int i = 0; i < domain.dim; ++i) {
        const double mid = 0.5 * (domain.lo[i] + domain.hi[i]);
        integral += c[i] * mid * domain.volume();
    }
    // exact bounds at box corners
    double lo = c0, hi = c0;
    for (int i = 0; i < domain.dim; ++i) {
        lo += c[i] * (c[i] >= 0.0 ? domain.lo[i] : domain.hi[i]);
        hi += c[i] * (c[i] >= 0.0 ? domain.hi[i] : domain.lo[i]);
    }
    if (!(lo > 0.0)) throw ConfigError("affine density is not positive on the box");
    f.norm_ = integral;
    f.lower_ = lo / integral;
    f.upper_ = hi / integral;
    return f;
}

DensityField DensityField::gaussian_bump(const Domain& domain, const Eigen::VectorXd& center,
                                         double width, double amplitude, double floor) {
    if (center.size() != domain.dim) throw InvalidArgument("bump center size must equal dim");
    if (width <= 0.0) throw InvalidArgument("bump width must be positive");
    if (floor <= 0.0) throw ConfigError("bump floor must be positive");
    DensityField f(domain, DensityKind::GaussianBump);
    f.center_a_ = center;
    f.width_ = width;
    f.amplitude_ = amplitude;
    f.floor_ = floor;
    f.normalize_and_bound();
    return f;
}

DensityField DensityField::two_blob(const Domain& domain, const Eigen::VectorXd& center_a,
                                    const Eigen::VectorXd& center_b, double width,
                                    double amplitude, double floor) {
    if (center_a.size() != domain.dim || center_b.size() != domain.dim) {
        throw InvalidArgument("blob center size must equal dim");
    }
    if (width <= 0.0) throw InvalidArgument("blob width must be positive");
    if (floor <= 0.0) throw ConfigError("blob floor must be positive");
    DensityField f(domain, DensityKind::TwoBlob);
    f.center_a_ = center_a;
    f.center_b_ = center_b;
    f.width_ = width;
    f.amplitude_ = amplitude;
    f.floor_ = floor;
    f.normalize_and_bound();
    return f;
}

PointCloud sample(const DensityField& density, int n, std::uint64_t seed) {
    if (n < 1) throw InvalidArgument("sample: n must be at least 1");
    const Domain& dom = density.domain();
    const double bound = density.upper_bound();
    Rng rng(seed);
    PointCloud cloud;
    cloud.seed = seed;
    cloud.points.resize(n, dom.dim);
    Eigen::VectorXd x(dom.dim);
    for (int i = 0; i < n; ++i) {
        for (;;) {
            for (int k = 0; k < dom.dim; ++k) {
                x[k] = rng.uniform(dom.lo[k], dom.hi[k]);
            }
            const double u = rng.uniform();
            if (u * bound <= density(x)) break;
        }
        cloud.points.row(i) = x.transpose();
    }
    return cloud;
}

GridMeasure empirical_measure(const PointCloud& cloud) {
    GridMeasure m;
    m.atoms = cloud.points;
    m.weights = Eigen::VectorXd::Constant(cloud.size(), 1.0 / cloud.size());
    return m;
}

GridMeasure grid_discretize(const DensityField& density, const std::array<int, 3>& resolution) {
    const Domain& dom = density.domain();
    std::array<int, 3> counts{1, 1, 1};
    for (int i = 0; i < dom.dim; ++i) {
        if (resolution[i] < 2) throw InvalidArgument("grid resolution must be at least 2 per axis");
        counts[i] = resolution[i];
    }
    const long total = static_cast<long>(counts[0]) * counts[1] * counts[2];
    GridMeasure grid;
    grid.atoms.resize(total, dom.dim);
    grid.weights.resize(total);
    grid.resolution = counts;
    const double cell = dom.volume() / static_cast<double>(total);
    for (int i = 0; i < dom.dim; ++i) grid.spacing[i] = dom.side(i) / counts[i];
    Eigen::VectorXd x(dom.dim);
    long row = 0;
    for (int a = 0; a < counts[0]; ++a) {
        for (int b = 0; b < counts[1]; ++b) {
            for (int c = 0; c < counts[2]; ++c) {
                const int idx[3] = {a, b, c};
                for (int i = 0; i < dom.dim; ++i) {
                    x[i] = dom.lo[i] + (idx[i] + 0.5) * grid.spacing[i];
                }
                grid.atoms.row(row) = x.transpose();
                grid.weights[row] = density(x) * cell;
                ++row;
            }
        }
    }
    grid.weights /= grid.weights.sum();
    return grid;
}

GridMeasure grid_discretize(const DensityField& density, int resolution_per_axis) {
    std::array<int, 3> res{1, 1, 1};
    for (int i = 0; i < density.domain().dim; ++i) res[i] = resolution_per_axis;
    return grid_discretize(density, res);
}

void write_cloud_csv(const PointCloud& cloud, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot open for writing: " + path);
    for (int k = 0; k < cloud.dim(); ++k) {
        out << (k ? "," : "") << "x" << (k + 1);
    }
    out << "\n";
    char buf[64];
    for (int i = 0; i < cloud.size(); ++i) {
        for (int k = 0; k < cloud.dim(); ++k) {
            std::snprintf(buf, sizeof(buf), "%.17g", cloud.points(i, k));
            out << (k ? "," : "") << buf;
        }
        out << "\n";
    }
}

} // namespace speclab
