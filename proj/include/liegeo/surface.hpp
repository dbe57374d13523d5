#pragma once

#include <array>
#include <functional>
#include <vector>

#include "liegeo/core.hpp"
#include "liegeo/series.hpp"

namespace liegeo {

// Row-major node storage: index(i, j) = i * nv + j, i along u, j along v.
struct GridShape {
    double u0 = 0, du = 0, v0 = 0, dv = 0;
    int nu = 0, nv = 0;
    int count() const { return nu * nv; }
    int idx(int i, int j) const { return i * nv + j; }
    double u(int i) const { return u0 + du * i; }
    double v(int j) const { return v0 + dv * j; }
};

struct EuclideanSurfaceGrid {
    GridShape shape;
    std::vector<Vec3> f, n;
    // optional exact first partials of f and n
    bool has_partials = false;
    std::vector<Vec3> fu, fv, n_u, n_v;
    // optional exact curvature package (for the closed-form coframe)
    bool has_curvatures = false;
    std::vector<double> k1, k2, g11, g22, dk1_du, dk2_dv;

    // max |<f_uv, n>| relative to curvature scale (curvature-line check)
    double offdiagonal_residual() const;
};

struct LegendreSurfaceGrid {
    GridShape shape;
    std::vector<Vec6> phi0, phi1;
    bool has_partials = false;
    std::vector<Vec6> phi0_u, phi0_v, phi1_u, phi1_v;

    struct Residuals {
        double isotropy = 0;      // pointwise relations among phi0, phi1
        double legendre = 0;      // <d phi0, phi1>
        double cross_offdiag = 0; // mixed (u,v) components of the three forms
        double stalk_min = 0;     // min independence of the two quadratic forms
    };
    Residuals residuals() const;
    void validate(double tol) const; // throws on violated invariants

    Vec6 d_phi(int which, int dir, int i, int j) const; // exact or FD
};

// Contact lift of a Euclidean grid. Throws NotCurvatureLineCoordinates.
LegendreSurfaceGrid lift_euclidean(const EuclideanSurfaceGrid& g, double tol = 1e-6);

// ---------------------------------------------------------------------------

struct ReductionState {
    std::vector<double> y21, y12; // second-order gauge
    std::vector<double> b3;       // third-order gauge
    std::vector<double> r4, s4;   // fourth-order scaling
    std::vector<double> p5, q5;   // fifth-order gauge
};

struct FrameField {
    GridShape shape;
    int order = 0;
    std::vector<Mat6> frames;
    ReductionState state;
};

struct Coframe {
    GridShape shape;
    std::vector<double> a, b; // alpha^1 = a du, alpha^2 = b dv
};

struct PfaffianReport {
    // max residual per displayed condition (both coordinate components)
    std::array<double, 8> per_equation{};
    double max_residual = 0;
    bool orientation_ok = true;
};

struct ReductionOptions {
    int fd_order = 2;
    double degeneracy_tol = 1e-7;
    double stalk_tol = 1e-7;
};

struct ReductionResult {
    FrameField frame;
    Coframe coframe;
    PfaffianReport report;
};

// Five-stage reduction to the normal frame. Throws DegenerateSurface,
// StalkCollapse.
ReductionResult reduce_to_normal_frame(const LegendreSurfaceGrid& s,
                                       const ReductionOptions& opts = {});

// ---------------------------------------------------------------------------

struct InvariantField {
    GridShape shape;
    std::vector<double> q1, q2, p1, p2, r1, r2;
    // optional exact partials (series-evaluated fields)
    bool has_derivs = false;
    std::vector<double> dq1_du, dq1_dv, dq2_du, dq2_dv;
    std::vector<double> dp1_du, dp1_dv, dp2_du, dp2_dv;
    std::vector<double> dr1_du, dr1_dv, dr2_du, dr2_dv;
    double lsq_residual = 0;     // total least-squares residual of (1.2.6)-type solve
    double alpha04_residual = 0; // consistency of the fifth relation
};

InvariantField extract_invariants(const FrameField& frame, const Coframe& cof,
                                  const ReductionOptions& opts = {});

// Closed-form coframe from curvature-line data. Throws UmbilicPoint,
// DegenerateSurface.
Coframe blaschke_coframe_closed_form(const EuclideanSurfaceGrid& g, double tol = 1e-10);

struct StructureResiduals {
    // per equation: {d alpha^1, d alpha^2, two q-relations, three (p,r)-relations}
    std::array<double, 7> max_norm{};
    std::array<double, 7> l2_norm{};
};
StructureResiduals structure_residuals(const InvariantField& inv, const Coframe& cof);

struct ElResiduals {
    GridShape shape;
    std::vector<double> r1_residual; // dr1 ^ alpha^2 - 4 q1 r1 alpha^1 ^ alpha^2, per unit area form
    std::vector<double> r2_residual;
    double max1 = 0, max2 = 0;
    bool is_minimal = false;
};
ElResiduals el_residuals(const InvariantField& inv, const Coframe& cof, double tol = 1e-8);

double lie_area(const Coframe& cof);

struct GaussMapResult {
    std::vector<DupinElement> planes;
    double isometry_deviation = 0; // pullback of the Dupin metric vs alpha^1 alpha^2
};
GaussMapResult gauss_map(const FrameField& frame, const Coframe& cof,
                         const ReductionOptions& opts = {});

struct ShapeData {
    GridShape shape;
    // B3-coefficient 1-forms of S(X1), S(X2) in the (alpha^1, alpha^2) basis
    std::vector<std::array<double, 2>> s1_b3, s2_b3;
    // constant normal coefficients: S(X1) ~ alpha^1 (-p1 B6 - r2 B7 + B8),
    // S(X2) ~ alpha^2 (B5 - r1 B6 - p2 B7)
    std::vector<double> mean_curvature; // B3-coefficient of the harmonicity combination
};
ShapeData shape_and_mean_curvature(const InvariantField& inv, const Coframe& cof);

// ---------------------------------------------------------------------------
// Analytic test charts sampled with exact jets

using ChartJet = std::function<std::array<Series2, 3>(double, double, int)>;

ChartJet ellipsoid_chart(double a, double b, double c);
ChartJet torus_chart(double R, double r);
ChartJet sphere_chart(double R);

EuclideanSurfaceGrid sample_chart(const ChartJet& chart, const GridShape& shape);

// Transform a Legendre grid by a group element (partials included when present).
LegendreSurfaceGrid transform_grid(const LieGroupElement& g, const LegendreSurfaceGrid& s);

// Euclidean projection of a contact-element grid (the point-sphere point of
// each pencil). Used for OBJ export.
std::vector<Vec3> euclidean_projection(const LegendreSurfaceGrid& s, double tol = 1e-9);

} // namespace liegeo
