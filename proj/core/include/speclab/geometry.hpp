#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "speclab/errors.hpp"

namespace speclab {

/// Axis-aligned box in d in {1,2,3}.
struct Domain {
    int dim = 1;
    std::array<double, 3> lo{0.0, 0.0, 0.0};
    std::array<double, 3> hi{1.0, 1.0, 1.0};

    Domain() = default;
    Domain(int d, std::array<double, 3> a, std::array<double, 3> b);

    static Domain unit_box(int d);

    double side(int axis) const { return hi[axis] - lo[axis]; }
    double volume() const;
    double diameter() const;
    bool contains(const Eigen::VectorXd& x) const;
};

enum class DensityKind {
    Uniform,
    Affine,        // rho(x) proportional to c0 + c . x
    GaussianBump,  // separable Gaussian bump plus floor, truncated to the box
    TwoBlob,       // two Gaussian blobs joined by a low-density background
};

/// Probability density on a Domain, normalized so the integral over the box is 1.
/// Bounded above and below by positive constants (M and m).
class DensityField {
public:
    static DensityField uniform(const Domain& domain);
    /// rho(x) proportional to c0 + sum_i c_i x_i; must stay positive on the box.
    static DensityField affine(const Domain& domain, double c0, const Eigen::VectorXd& c);
    /// floor + amp * prod_i exp(-(x_i-center_i)^2 / (2 width^2)), renormalized.
    static DensityField gaussian_bump(const Domain& domain, const Eigen::VectorXd& center,
                                      double width, double amplitude, double floor);
    /// Two bumps at the given centers over a low floor; the ground truth for
    /// cluster-consistency experiments.
    static DensityField two_blob(const Domain& domain, const Eigen::VectorXd& center_a,
                                 const Eigen::VectorXd& center_b, double width, double amplitude,
                                 double floor);

    const Domain& domain() const { return domain_; }
    DensityKind kind() const { return kind_; }

    /// Normalized density value at x.
    double operator()(const Eigen::VectorXd& x) const;

    double lower_bound() const { return lower_; }  // m
    double upper_bound() const { return upper_; }  // M

private:
    DensityField(const Domain& domain, DensityKind kind);
    double raw(const Eigen::VectorXd& x) const;
    void normalize_and_bound();

    Domain domain_;
    DensityKind kind_;
    double c0_ = 1.0;
    Eigen::VectorXd coeff_;
    Eigen::VectorXd center_a_, center_b_;
    double width_ = 0.1, amplitude_ = 0.0, floor_ = 1.0;
    double norm_ = 1.0;   // raw values are divided by this
    double lower_ = 1.0;  // m
    double upper_ = 1.0;  // M
};

/// i.i.d. sample from a DensityField, points stored row-wise (n x d).
struct PointCloud {
    Eigen::MatrixXd points;
    std::uint64_t seed = 0;

    int size() const { return static_cast<int>(points.rows()); }
    int dim() const { return static_cast<int>(points.cols()); }
};

/// Finitely supported measure: atoms (rows) with nonnegative weights summing to 1.
/// Used both for grid discretizations of the continuum measure and for
/// empirical measures.
struct GridMeasure {
    Eigen::MatrixXd atoms;
    Eigen::VectorXd weights;
    std::array<int, 3> resolution{0, 0, 0};  // zero when not grid-structured
    std::array<double, 3> spacing{0.0, 0.0, 0.0};

    int size() const { return static_cast<int>(atoms.rows()); }
    int dim() const { return static_cast<int>(atoms.cols()); }
};

/// Rejection sampling against the density's upper bound. Deterministic given seed.
PointCloud sample(const DensityField& density, int n, std::uint64_t seed);

/// Uniform atomic measure on the cloud's points.
GridMeasure empirical_measure(const PointCloud& cloud);

/// Midpoint-rule discretization of the density on a regular grid; weights
/// renormalized to sum exactly to 1.
GridMeasure grid_discretize(const DensityField& density, const std::array<int, 3>& resolution);
GridMeasure grid_discretize(const DensityField& density, int resolution_per_axis);

/// CSV serialization of a point cloud (header x1..xd, one row per point).
void write_cloud_csv(const PointCloud& cloud, const std::string& path);

} // namespace speclab
