#pragma once

#include <array>
#include <cstdint>

#include "liegeo/core.hpp"

namespace liegeo {

// Configuration space of the Lie-minimal Pfaffian system: the group times the
// six invariant-function coordinates.
struct ConfigPoint {
    LieGroupElement frame;
    double q1 = 0, q2 = 0, p1 = 0, p2 = 0, r1 = 0, r2 = 0;
};

// Tangent value in the adapted coframe coordinates
// (omega^1, omega^2, eta^1..eta^13, pi^i, upsilon^i, zeta^i).
struct TangentValue {
    double w1 = 0, w2 = 0;
    std::array<double, 13> x{}; // eta values
    std::array<double, 2> y{};  // dq
    std::array<double, 2> u{};  // dp
    std::array<double, 2> v{};  // dr

    double max_eta() const {
        double m = 0;
        for (double e : x) m = std::max(m, std::abs(e));
        return m;
    }
};

// Values of the thirteen generator 1-forms on a raw tangent (a Maurer-Cartan
// value plus the invariant-coordinate velocities).
std::array<double, 13> eval_one_forms(const ConfigPoint& z, const LieAlgebraElement& omega,
                                      const std::array<double, 2>& dq,
                                      const std::array<double, 2>& dp,
                                      const std::array<double, 2>& dr);

TangentValue tangent_from_raw(const ConfigPoint& z, const LieAlgebraElement& omega,
                              const std::array<double, 2>& dq, const std::array<double, 2>& dp,
                              const std::array<double, 2>& dr);

// Two-dimensional plane spanned by tangents normalized to the identity
// pattern in (omega^1, omega^2).
struct IntegralElement2 {
    TangentValue t1; // (w1,w2) = (1,0)
    TangentValue t2; // (w1,w2) = (0,1)

    // Residuals of the defining linear equations of V_2(I, Omega).
    std::array<double, 6> scalar_equation_residuals(const ConfigPoint& z) const;
    double max_x() const { return std::max(t1.max_eta(), t2.max_eta()); }
};

// Theta^1, Theta^2, Omega^1..Omega^4 on the plane (t1, t2) of a candidate,
// by the alternating pairing. Order: {Theta1, Theta2, Om1, Om2, Om3, Om4}.
std::array<double, 6> eval_two_forms(const ConfigPoint& z, const TangentValue& t1,
                                     const TangentValue& t2);
std::array<double, 6> eval_two_forms(const ConfigPoint& z, const IntegralElement2& e);

struct PolarSystem {
    Eigen::MatrixXd matrix; // 19 x 21
    int rank = 0;
    int polar_dim = 0;
};

// Polar equations of a 1-dimensional integral element (x-components must
// vanish). Throws NotIntegralElement.
PolarSystem polar_system(const ConfigPoint& z, const TangentValue& e1, double tol = 1e-9);

// Dimension of the solution space of the V_2(I, Omega) equations in the 38
// plane coordinates.
int v2_fiber_dimension(const ConfigPoint& z);

bool noncharacteristic_test(const ConfigPoint& z, const TangentValue& e1, double tol = 1e-9);

// Randomized sampling helpers for the involutivity report.
ConfigPoint random_config_point(std::uint64_t seed, double scale = 0.5);
TangentValue random_integral_tangent(const ConfigPoint& z, std::uint64_t seed,
                                     bool noncharacteristic = true);
IntegralElement2 random_integral_element2(const ConfigPoint& z, std::uint64_t seed);

struct InvolutivityReport {
    std::uint64_t seed = 0;
    int samples = 0;
    int polar_dim_expected = 2;
    int fiber_dim_expected = 6;
    int polar_dim_failures = 0;
    int fiber_dim_failures = 0;
    double max_two_form_residual = 0.0;
};
InvolutivityReport involutivity_report(std::uint64_t seed, int samples);

} // namespace liegeo
