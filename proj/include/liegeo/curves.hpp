#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "liegeo/core.hpp"
#include "liegeo/series.hpp"

namespace liegeo {

// Frenet coefficient matrix of a polarized Legendre curve (per unit line
// element), parametrized by the four generalized curvatures.
Mat6 frenet_coefficient_matrix(double k0, double k1, double k2, double k3);

struct LegendreCurveSamples {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<Vec6> V0;
    std::vector<Vec6> V1;

    int size() const { return static_cast<int>(V0.size()); }
    double t(int i) const { return t0 + dt * i; }

    // Max residuals of the defining relations, finite-difference based:
    // {isotropy, <V0,dV1>, <dV0,V1>} scales relative.
    struct Residuals {
        double isotropy;
        double v0_dv1;
        double dv0_v1;
    };
    Residuals residuals() const;
    bool valid(double tol) const;
};

struct PolarizationSection {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<Vec6> V;
    // Optional exact derivatives (outer index: derivative order 1..5).
    std::vector<std::vector<Vec6>> exact_derivs;

    int size() const { return static_cast<int>(V.size()); }
    // k-th derivative at sample i (exact when present, else finite differences).
    Vec6 derivative(int order, int i) const;
};

struct FrenetData {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<LieGroupElement> frames;
    std::vector<double> mu;
    std::vector<double> k0, k1, k2, k3;
    // Max deviation of R^{-1}R' from mu * coefficient matrix over all slots.
    double pattern_residual = 0.0;
};

// Linear fullness per sample: |det[V0,V1,V0',V1',V0'',V1'']| above tol (relative).
std::vector<bool> is_linearly_full(const LegendreCurveSamples& c, double tol = 1e-9);

// Osculating 3-planes of a fat section. Throws FatnessFailure / SignatureFailure.
std::vector<DupinElement> directrix(const PolarizationSection& p, double tol = 1e-7);

// Rank of the osculating flag [V, V', ..., V^(5)] per sample (fatness report).
std::vector<int> fatness_rank(const PolarizationSection& p, double tol = 1e-7);

struct PolarizationReport {
    bool is_polarization = false;
    std::vector<double> pullback; // delta*(g_D) per sample
    std::vector<double> mu;       // sqrt(-pullback) where defined
};
PolarizationReport is_polarization(const PolarizationSection& p, double tol = 1e-7);

struct FrenetOptions {
    int fd_order = 4;
    double degeneracy_tol = 1e-8;
};
FrenetData frenet_frame(const LegendreCurveSamples& c, const PolarizationSection& p,
                        const FrenetOptions& opts = {});

struct CurveSynthesisResult {
    LegendreCurveSamples curve;
    PolarizationSection section; // first frame column
    FrenetData frenet;
};

// Integrates the Frenet system R' = R M(k(t)) mu(t) with RK4 and group
// re-projection. Throws StepFailure when the projection diverges.
CurveSynthesisResult curve_from_curvatures(const std::function<double(double)>& k0,
                                           const std::function<double(double)>& k1,
                                           const std::function<double(double)>& k2,
                                           const std::function<double(double)>& k3,
                                           const std::function<double(double)>& mu_coeff,
                                           const LieGroupElement& frame0, double t0, double dt,
                                           int n);

// Series solution of the same system about t = 0 (exact jets for the Cauchy
// problem): returns the 36 entry series of R(t).
std::vector<Series1> frenet_frame_series(const Series1& k0, const Series1& k1,
                                         const Series1& k2, const Series1& k3,
                                         const Series1& mu_coeff, const LieGroupElement& frame0,
                                         int order);

Series1 series_entry(const std::vector<Series1>& m, int i, int j);

} // namespace liegeo
