#pragma once

// Exact SO(3) / so(3) primitives under a left-invariant metric.

#include <array>

#include <Eigen/Dense>

namespace liebridge {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Axis coordinates of an element of so(3) (radians along e1, e2, e3).
using AlgebraVector = Eigen::Vector3d;

inline constexpr double kOrthoTolerance = 1e-8;
/// Rotations with angle >= pi - kCutLocusEps are treated as on the cut locus.
inline constexpr double kCutLocusEps = 1e-6;
inline constexpr double kSmallAngle = 1e-4;

/// A 3x3 real matrix acting as a rotation. Construction does not validate;
/// use is_valid() when the orthogonality contract matters.
class GroupElement {
public:
    GroupElement() : m_(Mat3::Identity()) {}
    explicit GroupElement(const Mat3& m) : m_(m) {}

    static GroupElement identity() { return GroupElement(); }

    const Mat3& matrix() const { return m_; }

    GroupElement inverse() const { return GroupElement(m_.transpose()); }

    GroupElement operator*(const GroupElement& other) const { return GroupElement(m_ * other.m_); }

    /// ||m^T m - I||_F
    double orthogonality_error() const;

    bool is_valid(double tol = kOrthoTolerance) const;

private:
    Mat3 m_;
};

/// Symmetric positive-definite inner product on so(3), with cached Cholesky factor.
class MetricTensor {
public:
    /// Throws ArgumentError on asymmetry or non-finite entries, NotSPDError when
    /// the Cholesky factorization fails.
    explicit MetricTensor(const Mat3& a);

    static MetricTensor identity() { return MetricTensor(Mat3::Identity()); }
    static MetricTensor diagonal(double a11, double a22, double a33);

    const Mat3& matrix() const { return a_; }
    const Mat3& cholesky_lower() const { return lower_; }

    double determinant() const;
    double norm_squared(const AlgebraVector& w) const { return w.dot(a_ * w); }
    double norm(const AlgebraVector& w) const;

private:
    Mat3 a_;
    Mat3 lower_;
};

/// Left-invariant orthonormal frame V_i(x) = x hat(v_i) for a metric.
struct Frame {
    std::array<AlgebraVector, 3> basis;
    /// Columns are the basis vectors.
    Mat3 basis_matrix;
    /// structure[k][i][j] = C^k_ij with [v_i, v_j] = sum_k C^k_ij v_k.
    std::array<std::array<std::array<double, 3>, 3>, 3> structure{};
    /// Stratonovich drift coordinates.
    AlgebraVector v0;

    /// sum_i v_i db^i
    AlgebraVector combine(const Vec3& coefficients) const { return basis_matrix * coefficients; }
};

Mat3 hat(const AlgebraVector& v);
AlgebraVector vee(const Mat3& m);

/// Rodrigues exponential.
GroupElement group_exp(const AlgebraVector& v);

/// Rotation angle in [0, pi].
double rotation_angle(const GroupElement& r);

/// Principal logarithm. Throws CutLocusError when the angle is >= pi - kCutLocusEps.
AlgebraVector group_log(const GroupElement& r);

/// Nearest rotation in Frobenius norm (polar factor). Throws NumericalError on non-finite input.
GroupElement project_to_so3(const Mat3& m);

Frame frame_from_metric(const MetricTensor& a);

/// ||group_log(x^T y)||_A. Exact geodesic distance when a is a multiple of I.
double distance(const GroupElement& x, const GroupElement& y, const MetricTensor& a);

/// Jacobian determinant of the exponential map at radius r, 2(1 - cos r)/r^2.
double jacobian_theta(double r);

/// d/dr log jacobian_theta(r) = sin r/(1 - cos r) - 2/r.
double dlog_theta(double r);

}  // namespace liebridge
