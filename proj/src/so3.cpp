#include "liebridge/so3.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "liebridge/errors.hpp"

namespace liebridge {

double GroupElement::orthogonality_error() const {
    return (m_.transpose() * m_ - Mat3::Identity()).norm();
}

bool GroupElement::is_valid(double tol) const {
    return m_.allFinite() && orthogonality_error() < tol && std::abs(m_.determinant() - 1.0) < tol;
}

MetricTensor::MetricTensor(const Mat3& a) {
    if (!a.allFinite()) {
        throw ArgumentError("metric tensor has non-finite entries");
    }
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if ((a - a.transpose()).norm() >= 1e-12 * scale) {
        throw ArgumentError("metric tensor is not symmetric");
    }
    a_ = 0.5 * (a + a.transpose());
    Eigen::LLT<Mat3> llt(a_);
    if (llt.info() != Eigen::Success || !(llt.matrixL().toDenseMatrix().diagonal().array() > 0.0).all()) {
        throw NotSPDError("metric tensor is not positive definite");
    }
    lower_ = llt.matrixL();
}

MetricTensor MetricTensor::diagonal(double a11, double a22, double a33) {
    return MetricTensor(Vec3(a11, a22, a33).asDiagonal().toDenseMatrix());
}

double MetricTensor::determinant() const {
    const double d = lower_.diagonal().prod();
    return d * d;
}

double MetricTensor::norm(const AlgebraVector& w) const {
    return (lower_.transpose() * w).norm();
}

Mat3 hat(const AlgebraVector& v) {
    Mat3 m;
    m << 0.0, -v.z(), v.y(),
         v.z(), 0.0, -v.x(),
         -v.y(), v.x(), 0.0;
    return m;
}

AlgebraVector vee(const Mat3& m) {
    return AlgebraVector(m(2, 1), m(0, 2), m(1, 0));
}

GroupElement group_exp(const AlgebraVector& v) {
    const double theta = v.norm();
    const Mat3 w = hat(v);
    double a;  // sin(theta)/theta
    double b;  // (1 - cos(theta))/theta^2
    if (theta < kSmallAngle) {
        const double t2 = theta * theta;
        a = 1.0 - t2 / 6.0;
        b = 0.5 - t2 / 24.0;
    } else {
        a = std::sin(theta) / theta;
        const double half = std::sin(0.5 * theta) / theta;
        b = 2.0 * half * half;
    }
    return GroupElement(Mat3::Identity() + a * w + b * (w * w));
}

namespace {

// Returns (sin(theta) * axis, cos(theta)) read off a rotation matrix.
std::pair<Vec3, double> sin_cos_parts(const Mat3& r) {
    const Vec3 s = 0.5 * vee(r - r.transpose());
    const double c = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
    return {s, c};
}

}  // namespace

double rotation_angle(const GroupElement& r) {
    const auto [s, c] = sin_cos_parts(r.matrix());
    return std::atan2(s.norm(), c);
}

AlgebraVector group_log(const GroupElement& r) {
    const Mat3& m = r.matrix();
    const auto [s, c] = sin_cos_parts(m);
    const double sin_theta = s.norm();
    const double theta = std::atan2(sin_theta, c);
    if (!(theta < std::numbers::pi - kCutLocusEps)) {
        throw CutLocusError("rotation angle " + std::to_string(theta) + " is on the cut locus");
    }
    if (theta < kSmallAngle) {
        return s * (1.0 + theta * theta / 6.0);
    }
    if (theta < 0.75 * std::numbers::pi) {
        return s * (theta / sin_theta);
    }
    // Near pi the antisymmetric part is tiny; recover the axis from the
    // symmetric part (R + R^T)/2 - cos(theta) I = (1 - cos(theta)) a a^T.
    const Mat3 sym = 0.5 * (m + m.transpose()) - c * Mat3::Identity();
    Eigen::Index i = 0;
    sym.diagonal().maxCoeff(&i);
    Vec3 axis = sym.col(i) / std::sqrt(sym(i, i) * (1.0 - c));
    axis.normalize();
    if (axis.dot(s) < 0.0) {
        axis = -axis;
    }
    return theta * axis;
}

GroupElement project_to_so3(const Mat3& m) {
    if (!m.allFinite()) {
        throw NumericalError("cannot project a non-finite matrix onto SO(3)");
    }
    Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 u = svd.matrixU();
    const Mat3& v = svd.matrixV();
    if ((u * v.transpose()).determinant() < 0.0) {
        u.col(2) = -u.col(2);
    }
    Mat3 out = u * v.transpose();
    if (!out.allFinite()) {
        throw NumericalError("polar projection produced non-finite entries");
    }
    return GroupElement(out);
}

Frame frame_from_metric(const MetricTensor& a) {
    Frame f;
    // With A = L L^T, the columns of L^{-T} are A-orthonormal.
    const Mat3& lower = a.cholesky_lower();
    f.basis_matrix = lower.transpose().triangularView<Eigen::Upper>().solve(Mat3::Identity());
    for (int i = 0; i < 3; ++i) {
        f.basis[i] = f.basis_matrix.col(i);
    }
    // Coordinates of w in the basis are L^T w.
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const Vec3 c = lower.transpose() * f.basis[i].cross(f.basis[j]);
            for (int k = 0; k < 3; ++k) {
                f.structure[k][i][j] = c[k];
            }
        }
    }
    // V_0 = sum_i tr(ad_{v_i}) v_i, tr(ad_{v_i}) = sum_j C^j_ij.
    f.v0 = AlgebraVector::Zero();
    for (int i = 0; i < 3; ++i) {
        double trace = 0.0;
        for (int j = 0; j < 3; ++j) {
            trace += f.structure[j][i][j];
        }
        f.v0 += trace * f.basis[i];
    }
    return f;
}

double distance(const GroupElement& x, const GroupElement& y, const MetricTensor& a) {
    return a.norm(group_log(GroupElement(x.matrix().transpose() * y.matrix())));
}

namespace {

void check_radius(double r) {
    if (!(r >= 0.0) || r >= 2.0 * std::numbers::pi) {
        throw DomainError("radius " + std::to_string(r) + " outside [0, 2pi)");
    }
}

}  // namespace

double jacobian_theta(double r) {
    check_radius(r);
    if (r < kSmallAngle) {
        return 1.0 - r * r / 12.0;
    }
    // 2(1 - cos r)/r^2 written as (sin(r/2)/(r/2))^2 to avoid cancellation.
    const double q = std::sin(0.5 * r) / (0.5 * r);
    return q * q;
}

double dlog_theta(double r) {
    check_radius(r);
    if (r < kSmallAngle) {
        return -r / 6.0;
    }
    // sin r/(1 - cos r) = cot(r/2)
    return std::cos(0.5 * r) / std::sin(0.5 * r) - 2.0 / r;
}

}  // namespace liebridge
