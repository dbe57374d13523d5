#include "liegeo/eds.hpp"

#include <random>

namespace liegeo {

std::array<double, 13> eval_one_forms(const ConfigPoint& z, const LieAlgebraElement& omega,
                                      const std::array<double, 2>& dq,
                                      const std::array<double, 2>& dp,
                                      const std::array<double, 2>& dr) {
    (void)dq;
    (void)dp;
    (void)dr;
    const Mat6& m = omega.m;
    const double w1 = m(3, 0);
    const double w2 = m(2, 1);
    std::array<double, 13> x;
    x[0] = m(4, 0);
    x[1] = m(2, 0);
    x[2] = m(3, 1);
    x[3] = m(3, 2);
    x[4] = m(1, 0) - w2;
    x[5] = m(0, 1) - w1;
    x[6] = m(0, 2);
    x[7] = m(1, 3);
    x[8] = m(0, 0) + 2.0 * z.q1 * w1 - z.q2 * w2;
    x[9] = m(1, 1) + z.q1 * w1 - 2.0 * z.q2 * w2;
    x[10] = m(0, 3) - z.r1 * w1 - z.p2 * w2;
    x[11] = m(1, 2) - z.p1 * w1 - z.r2 * w2;
    x[12] = m(0, 4) + z.r2 * w1 - z.r1 * w2;
    return x;
}

TangentValue tangent_from_raw(const ConfigPoint& z, const LieAlgebraElement& omega,
                              const std::array<double, 2>& dq, const std::array<double, 2>& dp,
                              const std::array<double, 2>& dr) {
    TangentValue t;
    t.w1 = omega.m(3, 0);
    t.w2 = omega.m(2, 1);
    t.x = eval_one_forms(z, omega, dq, dp, dr);
    t.y = dq;
    t.u = dp;
    t.v = dr;
    return t;
}

namespace {
inline double wedge(double a1, double b1, double a2, double b2) {
    // (alpha ^ beta)(T1, T2) with alpha(Ti) = ai, beta(Ti) = bi
    return a1 * b2 - a2 * b1;
}
} // namespace

std::array<double, 6> eval_two_forms(const ConfigPoint& z, const TangentValue& t1,
                                     const TangentValue& t2) {
    const double om = wedge(t1.w1, t1.w2, t2.w1, t2.w2); // omega^1 ^ omega^2
    std::array<double, 6> out;
    // Theta^1 = dr1 ^ omega^2 - 4 q1 r1 Omega
    out[0] = wedge(t1.v[0], t1.w2, t2.v[0], t2.w2) - 4.0 * z.q1 * z.r1 * om;
    // Theta^2 = dr2 ^ omega^1 - 4 q2 r2 Omega
    out[1] = wedge(t1.v[1], t1.w1, t2.v[1], t2.w1) - 4.0 * z.q2 * z.r2 * om;
    // Omega^1 = 2 pi1 ^ omega^1 - pi2 ^ omega^2 + (-1 + p2 - q1 q2) Omega
    out[2] = 2.0 * wedge(t1.y[0], t1.w1, t2.y[0], t2.w1) -
             wedge(t1.y[1], t1.w2, t2.y[1], t2.w2) + (-1.0 + z.p2 - z.q1 * z.q2) * om;
    // Omega^2 = pi1 ^ omega^1 - 2 pi2 ^ omega^2 + (1 - p1 + q1 q2) Omega
    out[3] = wedge(t1.y[0], t1.w1, t2.y[0], t2.w1) -
             2.0 * wedge(t1.y[1], t1.w2, t2.y[1], t2.w2) + (1.0 - z.p1 + z.q1 * z.q2) * om;
    // Omega^3 = zeta1 ^ omega^1 + upsilon2 ^ omega^2 - (2 r1 q2 + 3 q1 p2) Omega
    out[4] = wedge(t1.v[0], t1.w1, t2.v[0], t2.w1) + wedge(t1.u[1], t1.w2, t2.u[1], t2.w2) -
             (2.0 * z.r1 * z.q2 + 3.0 * z.q1 * z.p2) * om;
    // Omega^4 = upsilon1 ^ omega^1 + zeta2 ^ omega^2 - (3 p1 q2 + 2 r2 q1) Omega
    out[5] = wedge(t1.u[0], t1.w1, t2.u[0], t2.w1) + wedge(t1.v[1], t1.w2, t2.v[1], t2.w2) -
             (3.0 * z.p1 * z.q2 + 2.0 * z.r2 * z.q1) * om;
    return out;
}

std::array<double, 6> eval_two_forms(const ConfigPoint& z, const IntegralElement2& e) {
    return eval_two_forms(z, e.t1, e.t2);
}

std::array<double, 6> IntegralElement2::scalar_equation_residuals(const ConfigPoint& z) const {
    // Plane coordinates: Y^i_j = pi^i(T_j) etc., 1-based in the usual notation.
    const double Y11 = t1.y[0], Y12 = t2.y[0], Y21 = t1.y[1], Y22 = t2.y[1];
    const double U12 = t2.u[0], U21 = t1.u[1];
    const double V11 = t1.v[0], V12 = t2.v[0], V21 = t1.v[1], V22 = t2.v[1];
    std::array<double, 6> r;
    r[0] = 2.0 * Y12 + Y21 + (1.0 - z.p2 + z.q1 * z.q2);
    r[1] = Y12 + 2.0 * Y21 - (1.0 - z.p1 + z.q1 * z.q2);
    r[2] = U21 - V12 - (2.0 * z.r1 * z.q2 + 3.0 * z.q1 * z.p2);
    r[3] = U12 - V21 + (3.0 * z.p1 * z.q2 + 2.0 * z.r2 * z.q1);
    r[4] = V11 - 4.0 * z.q1 * z.r1;
    // Sign of the constant fixed by Theta^2 itself (the quadric of dr2 ^ omega^1).
    r[5] = V22 + 4.0 * z.q2 * z.r2;
    (void)Y11;
    (void)Y22;
    return r;
}

PolarSystem polar_system(const ConfigPoint& z, const TangentValue& e1, double tol) {
    if (e1.max_eta() > 1e-7 * std::max({1.0, std::abs(e1.w1), std::abs(e1.w2)}))
        throw NotIntegralElement("eta components do not vanish on the given tangent");

    const double a1 = e1.w1, a2 = e1.w2;
    const double y1 = e1.y[0], y2 = e1.y[1];
    const double u1 = e1.u[0], u2 = e1.u[1];
    const double v1 = e1.v[0], v2 = e1.v[1];

    // Coordinate order: w1 w2 | x1..x13 | y1 y2 u1 u2 v1 v2
    constexpr int W1 = 0, W2 = 1, X0 = 2, Y1 = 15, Y2 = 16, U1 = 17, U2 = 18, V1 = 19, V2 = 20;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(19, 21);
    for (int a = 0; a < 13; ++a) m(a, X0 + a) = 1.0;

    const double C1 = -1.0 + z.p2 - z.q1 * z.q2;
    const double C2 = 1.0 - z.p1 + z.q1 * z.q2;
    const double D3 = 2.0 * z.r1 * z.q2 + 3.0 * z.q1 * z.p2;
    const double D4 = 3.0 * z.p1 * z.q2 + 2.0 * z.r2 * z.q1;
    const double E1c = 4.0 * z.q1 * z.r1;
    const double E2c = 4.0 * z.q2 * z.r2;

    int r = 13;
    // i_E Omega^1: 2(y1 w^1 - a1 pi^1) - (y2 w^2 - a2 pi^2) + C1 (a1 w^2 - a2 w^1)
    m(r, W1) = 2.0 * y1 - C1 * a2;
    m(r, W2) = -y2 + C1 * a1;
    m(r, Y1) = -2.0 * a1;
    m(r, Y2) = a2;
    ++r;
    // i_E Omega^2
    m(r, W1) = y1 - C2 * a2;
    m(r, W2) = -2.0 * y2 + C2 * a1;
    m(r, Y1) = -a1;
    m(r, Y2) = 2.0 * a2;
    ++r;
    // i_E Omega^3: (v1 w^1 - a1 zeta^1) + (u2 w^2 - a2 ups^2) - D3 (a1 w^2 - a2 w^1)
    m(r, W1) = v1 + D3 * a2;
    m(r, W2) = u2 - D3 * a1;
    m(r, V1) = -a1;
    m(r, U2) = -a2;
    ++r;
    // i_E Omega^4
    m(r, W1) = u1 + D4 * a2;
    m(r, W2) = v2 - D4 * a1;
    m(r, U1) = -a1;
    m(r, V2) = -a2;
    ++r;
    // i_E Theta^1: (v1 w^2 - a2 zeta^1) - E1c (a1 w^2 - a2 w^1)
    m(r, W1) = E1c * a2;
    m(r, W2) = v1 - E1c * a1;
    m(r, V1) = -a2;
    ++r;
    // i_E Theta^2: (v2 w^1 - a1 zeta^2) - E2c (a1 w^2 - a2 w^1)
    m(r, W1) = v2 + E2c * a2;
    m(r, W2) = -E2c * a1;
    m(r, V2) = -a1;
    ++r;

    PolarSystem out;
    out.matrix = m;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    double smax = sv(0);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > tol * smax) ++rank;
    out.rank = rank;
    out.polar_dim = 21 - rank;
    return out;
}

int v2_fiber_dimension(const ConfigPoint& z) {
    (void)z;
    // Linear part of the V_2(I, Omega) equations in the 38 plane coordinates
    // (X^a_j | Y^i_j | U^i_j | V^i_j). The constants do not affect the rank.
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(32, 38);
    int r = 0;
    for (int a = 0; a < 26; ++a) m(r++, a) = 1.0; // X^a_j = 0
    constexpr int Y = 26, U = 30, V = 34;         // each block ordered (i,j) = 11,12,21,22
    m(r, Y + 1) = 2.0;
    m(r, Y + 2) = 1.0;
    ++r;
    m(r, Y + 1) = 1.0;
    m(r, Y + 2) = 2.0;
    ++r;
    m(r, U + 2) = 1.0;
    m(r, V + 1) = -1.0;
    ++r;
    m(r, U + 1) = 1.0;
    m(r, V + 2) = -1.0;
    ++r;
    m(r, V + 0) = 1.0;
    ++r;
    m(r, V + 3) = 1.0;
    ++r;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > 1e-9 * sv(0)) ++rank;
    return 38 - rank;
}

bool noncharacteristic_test(const ConfigPoint& z, const TangentValue& e1, double tol) {
    double scale = std::max({std::abs(e1.w1), std::abs(e1.w2), 1e-300});
    if (std::abs(e1.w1 * e1.w2) <= tol * scale * scale) return false;
    return polar_system(z, e1).polar_dim == 2;
}

ConfigPoint random_config_point(std::uint64_t seed, double scale) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    ConfigPoint z;
    z.frame = random_group_element(seed * 2 + 1, 0.3);
    z.q1 = dist(rng);
    z.q2 = dist(rng);
    z.p1 = dist(rng);
    z.p2 = dist(rng);
    z.r1 = dist(rng);
    z.r2 = dist(rng);
    z.q1 *= scale;
    z.q2 *= scale;
    z.p1 *= scale;
    z.p2 *= scale;
    z.r1 *= scale;
    z.r2 *= scale;
    return z;
}

TangentValue random_integral_tangent(const ConfigPoint& z, std::uint64_t seed,
                                     bool noncharacteristic) {
    (void)z;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    TangentValue t;
    t.w1 = dist(rng);
    t.w2 = dist(rng);
    if (noncharacteristic) {
        while (std::abs(t.w1) < 0.1) t.w1 = dist(rng);
        while (std::abs(t.w2) < 0.1) t.w2 = dist(rng);
    }
    for (auto* arr : {&t.y, &t.u, &t.v})
        for (double& c : *arr) c = dist(rng);
    return t;
}

IntegralElement2 random_integral_element2(const ConfigPoint& z, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    IntegralElement2 e;
    e.t1.w1 = 1.0;
    e.t1.w2 = 0.0;
    e.t2.w1 = 0.0;
    e.t2.w2 = 1.0;
    // Free fiber coordinates: Y11, Y22, U11, U22, V12, V21.
    double Y11 = dist(rng), Y22 = dist(rng), U11 = dist(rng), U22 = dist(rng);
    double V12 = dist(rng), V21 = dist(rng);
    // Solve the six scalar relations for the rest.
    double c1 = 1.0 - z.p2 + z.q1 * z.q2;
    double c2 = 1.0 - z.p1 + z.q1 * z.q2;
    // 2 Y12 + Y21 = -c1 ; Y12 + 2 Y21 = c2
    double Y12 = (-2.0 * c1 - c2) / 3.0;
    double Y21 = (2.0 * c2 + c1) / 3.0;
    double U21 = V12 + (2.0 * z.r1 * z.q2 + 3.0 * z.q1 * z.p2);
    double U12 = V21 - (3.0 * z.p1 * z.q2 + 2.0 * z.r2 * z.q1);
    double V11 = 4.0 * z.q1 * z.r1;
    double V22 = -4.0 * z.q2 * z.r2;
    e.t1.y = {Y11, Y21};
    e.t2.y = {Y12, Y22};
    e.t1.u = {U11, U21};
    e.t2.u = {U12, U22};
    e.t1.v = {V11, V21};
    e.t2.v = {V12, V22};
    return e;
}

InvolutivityReport involutivity_report(std::uint64_t seed, int samples) {
    InvolutivityReport rep;
    rep.seed = seed;
    rep.samples = samples;
    for (int i = 0; i < samples; ++i) {
        ConfigPoint z = random_config_point(seed + 1000ull * i);
        TangentValue e1 = random_integral_tangent(z, seed + 1000ull * i + 7);
        if (polar_system(z, e1).polar_dim != 2) ++rep.polar_dim_failures;
        if (v2_fiber_dimension(z) != 6) ++rep.fiber_dim_failures;
        IntegralElement2 e2 = random_integral_element2(z, seed + 1000ull * i + 13);
        for (double val : eval_two_forms(z, e2))
            rep.max_two_form_residual = std::max(rep.max_two_form_residual, std::abs(val));
    }
    return rep;
}

} // namespace liegeo
