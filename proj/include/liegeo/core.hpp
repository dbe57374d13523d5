#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <variant>
#include <vector>

#include "liegeo/errors.hpp"

namespace liegeo {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

// Default relative tolerance used by all invariant checks in this module.
inline constexpr double kCoreTol = 1e-9;

// Metric of signature (4,2): <V,W> = -(v0 w5 + v5 w0) - (v1 w4 + v4 w1) + v2 w2 + v3 w3.
const Mat6& metric();

double inner(const Vec6& v, const Vec6& w);

inline Vec6 basis_vector(int i) {
    Vec6 e = Vec6::Zero();
    e[i] = 1.0;
    return e;
}

// ---------------------------------------------------------------------------
// Points of the Lie quadric and oriented sphere elements

struct QuadricPoint {
    Vec6 rep;

    // Scales the representative so its first nonzero coordinate is +1.
    QuadricPoint normalized(double tol = kCoreTol) const;
    bool is_isotropic(double tol = kCoreTol) const;
    bool same_point(const QuadricPoint& other, double tol = kCoreTol) const;
};

struct Sphere {
    Vec3 center;
    double radius; // signed
};
struct Plane {
    Vec3 point;
    Vec3 normal; // unit
};
struct PointSphere {
    Vec3 point;
};
struct InfinityPoint {};

using OrientedSphereElement = std::variant<Sphere, Plane, PointSphere, InfinityPoint>;

QuadricPoint sphere_to_quadric(const OrientedSphereElement& s);
OrientedSphereElement quadric_to_sphere(const QuadricPoint& q, double tol = kCoreTol);

bool oriented_contact(const QuadricPoint& a, const QuadricPoint& b, double tol = kCoreTol);

// ---------------------------------------------------------------------------
// Contact elements (points of the isotropic Grassmannian)

struct ContactElement {
    Vec6 V;
    Vec6 W;

    bool valid(double tol = kCoreTol) const;
    bool same_element(const ContactElement& other, double tol = kCoreTol) const;
};

// Contact lift of (p, n) in R^3 x S^2; throws NonUnitNormal.
ContactElement contact_lift(const Vec3& p, const Vec3& n, double tol = kCoreTol);

// The two generating null vectors of the lift.
Vec6 lift_point_sphere(const Vec3& p);
Vec6 lift_tangent_plane(const Vec3& p, const Vec3& n);

// ---------------------------------------------------------------------------
// Dupin elements: 3-planes of signature (2,1)

struct DupinElement {
    std::array<Vec6, 3> basis;

    // Eigenvalue signature of the Gram matrix: (positive, negative) counts.
    std::pair<int, int> gram_signature(double tol = kCoreTol) const;
    bool valid(double tol = kCoreTol) const;
};

// ---------------------------------------------------------------------------
// Group and algebra

struct LieGroupElement {
    Mat6 m;

    static LieGroupElement identity() { return {Mat6::Identity()}; }
    // |A^T g A - g| relative residual.
    double group_residual() const;
    bool valid(double tol = kCoreTol) const;
    // Equality in G/{+-I}.
    bool same_element(const LieGroupElement& other, double tol = kCoreTol) const;
};

struct LieAlgebraElement {
    Mat6 m;

    double algebra_residual() const;
    bool valid(double tol = kCoreTol) const;
};

QuadricPoint group_action(const LieGroupElement& a, const QuadricPoint& q, double tol = kCoreTol);
ContactElement group_action(const LieGroupElement& a, const ContactElement& c, double tol = kCoreTol);
DupinElement group_action(const LieGroupElement& a, const DupinElement& d, double tol = kCoreTol);

LieGroupElement group_exp(const LieAlgebraElement& x);

// Newton polish toward A^T g A = g; used after numerical integration.
Mat6 project_to_group(const Mat6& a, int iterations = 3);

// Pseudo-random group element exp(X), X bounded in entry scale.
LieGroupElement random_group_element(std::uint64_t seed, double scale = 0.3);
LieAlgebraElement random_algebra_element(std::uint64_t seed, double scale = 0.3);

// ---------------------------------------------------------------------------
// Maurer-Cartan estimation along sampled frame paths

struct MaurerCartanOptions {
    double step = 1.0;
    double jump_tol = 0.5; // relative frame jump that triggers SignAlignmentFailure
    int fd_order = 2;      // 2 or 4
};

// Resolves the +-I ambiguity by nearest-neighbor sign alignment, then applies
// central differences of the requested order. Returns one algebra value per
// input sample (one-sided differences at the ends).
std::vector<LieAlgebraElement> maurer_cartan(const std::vector<LieGroupElement>& frames,
                                             const MaurerCartanOptions& opts);

// Canonical pseudo-Riemannian metric of the Dupin manifold evaluated on one
// algebra value: w10 w01 + w04 w40 + w20 w02 + 2 w13 w31 - (w32)^2 / 2.
double dupin_metric_eval(const LieAlgebraElement& w);
// Symmetric bilinear extension.
double dupin_metric_eval(const LieAlgebraElement& w1, const LieAlgebraElement& w2);

// ---------------------------------------------------------------------------
// Witt-style frame completion helpers

// Given two null vectors spanning an isotropic 2-plane with <A0,A1> = 0,
// returns a full group-frame matrix (A0 A1 A2 A3 A4 A5) with Gram g and
// det +1, where A2, A3 are the given spacelike directions (orthonormalized
// in that order). Throws InvalidGroupElement on degeneracy.
Mat6 complete_frame(const Vec6& a0, const Vec6& a1, const Vec6& w2, const Vec6& w3);

// Witt basis (h0, h3, h5) of a signature-(2,1) subspace spanned by (x0,x1,x2)
// with x0 null: <h0,h5> = -1, h3 unit, h0 = x0. Throws SignatureFailure.
std::array<Vec6, 3> witt_basis_21(const Vec6& x0, const Vec6& x1, const Vec6& x2);

// Full frame adapted to a Dupin element: columns (0,3,5) span it.
Mat6 dupin_adapted_frame(const DupinElement& d);

} // namespace liegeo
