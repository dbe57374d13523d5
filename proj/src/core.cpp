#include "liegeo/core.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <random>

namespace liegeo {

namespace {
constexpr double kSqrt2 = 1.4142135623730950488;

Mat6 make_metric() {
    Mat6 g = Mat6::Zero();
    g(0, 5) = g(5, 0) = -1.0;
    g(1, 4) = g(4, 1) = -1.0;
    g(2, 2) = g(3, 3) = 1.0;
    return g;
}
} // namespace

const Mat6& metric() {
    static const Mat6 g = make_metric();
    return g;
}

double inner(const Vec6& v, const Vec6& w) {
    return -(v[0] * w[5] + v[5] * w[0]) - (v[1] * w[4] + v[4] * w[1]) + v[2] * w[2] +
           v[3] * w[3];
}

// ---------------------------------------------------------------------------

QuadricPoint QuadricPoint::normalized(double tol) const {
    double scale = rep.cwiseAbs().maxCoeff();
    for (int i = 0; i < 6; ++i) {
        if (std::abs(rep[i]) > tol * scale) return {rep / rep[i]};
    }
    throw NondecodableQuadricPoint("zero representative");
}

bool QuadricPoint::is_isotropic(double tol) const {
    double n2 = rep.squaredNorm();
    return n2 > 0.0 && std::abs(inner(rep, rep)) <= tol * n2;
}

bool QuadricPoint::same_point(const QuadricPoint& other, double tol) const {
    // Proportionality of representatives.
    Vec6 a = rep / rep.norm();
    Vec6 b = other.rep / other.rep.norm();
    return std::min((a - b).norm(), (a + b).norm()) <= tol * 10.0;
}

QuadricPoint sphere_to_quadric(const OrientedSphereElement& s) {
    return std::visit(
        [](const auto& e) -> QuadricPoint {
            using T = std::decay_t<decltype(e)>;
            Vec6 v;
            if constexpr (std::is_same_v<T, Sphere>) {
                const Vec3& p = e.center;
                double r = e.radius;
                v << 1.0, (r + p[0]) / kSqrt2, p[1], p[2], (r - p[0]) / kSqrt2,
                    (p.squaredNorm() - r * r) / 2.0;
            } else if constexpr (std::is_same_v<T, PointSphere>) {
                const Vec3& p = e.point;
                v << 1.0, p[0] / kSqrt2, p[1], p[2], -p[0] / kSqrt2, p.squaredNorm() / 2.0;
            } else if constexpr (std::is_same_v<T, Plane>) {
                const Vec3& n = e.normal;
                const Vec3& p = e.point;
                v << 0.0, (1.0 + n[0]) / 2.0, n[1] / kSqrt2, n[2] / kSqrt2, (1.0 - n[0]) / 2.0,
                    n.dot(p) / kSqrt2;
            } else {
                v = basis_vector(5);
            }
            return {v};
        },
        s);
}

OrientedSphereElement quadric_to_sphere(const QuadricPoint& q, double tol) {
    const Vec6& raw = q.rep;
    double scale = raw.cwiseAbs().maxCoeff();
    if (scale == 0.0) throw NondecodableQuadricPoint("zero representative");

    if (std::abs(raw[0]) > tol * scale) {
        Vec6 v = raw / raw[0];
        double r = (v[1] + v[4]) / kSqrt2;
        Vec3 p((v[1] - v[4]) / kSqrt2, v[2], v[3]);
        if (std::abs(r) <= tol * (1.0 + p.norm())) return PointSphere{p};
        return Sphere{p, r};
    }
    double s14 = raw[1] + raw[4];
    if (std::abs(s14) > tol * scale) {
        Vec6 v = raw / s14;
        Vec3 n(v[1] - v[4], kSqrt2 * v[2], kSqrt2 * v[3]);
        double np = kSqrt2 * v[5];
        return Plane{np * n, n};
    }
    // Only [eps5] survives the chart here.
    Vec6 v = raw / scale;
    Vec6 proj = v - v[5] * basis_vector(5);
    if (proj.norm() <= tol) return InfinityPoint{};
    throw NondecodableQuadricPoint(
        "v0 = 0 and v1 + v4 = 0 but representative is not proportional to eps5");
}

bool oriented_contact(const QuadricPoint& a, const QuadricPoint& b, double tol) {
    return std::abs(inner(a.rep, b.rep)) <= tol * a.rep.norm() * b.rep.norm();
}

// ---------------------------------------------------------------------------

bool ContactElement::valid(double tol) const {
    double s = std::max(V.norm(), W.norm());
    if (s == 0.0) return false;
    double s2 = s * s;
    if (std::abs(inner(V, V)) > tol * s2) return false;
    if (std::abs(inner(W, W)) > tol * s2) return false;
    if (std::abs(inner(V, W)) > tol * s2) return false;
    Eigen::Matrix<double, 6, 2> m;
    m.col(0) = V;
    m.col(1) = W;
    Eigen::JacobiSVD<Eigen::Matrix<double, 6, 2>> svd(m);
    return svd.singularValues()(1) > tol * svd.singularValues()(0);
}

bool ContactElement::same_element(const ContactElement& other, double tol) const {
    // Equal spans: each of the other's generators lies in our span.
    Eigen::Matrix<double, 6, 2> m;
    m.col(0) = V;
    m.col(1) = W;
    auto qr = m.colPivHouseholderQr();
    for (const Vec6* x : {&other.V, &other.W}) {
        Eigen::Vector2d c = qr.solve(*x);
        if ((m * c - *x).norm() > tol * 100.0 * x->norm()) return false;
    }
    return true;
}

Vec6 lift_point_sphere(const Vec3& p) {
    Vec6 v;
    v << 1.0, p[0] / kSqrt2, p[1], p[2], -p[0] / kSqrt2, p.squaredNorm() / 2.0;
    return v;
}

Vec6 lift_tangent_plane(const Vec3& p, const Vec3& n) {
    Vec6 v;
    v << 0.0, (1.0 + n[0]) / 2.0, n[1] / kSqrt2, n[2] / kSqrt2, (1.0 - n[0]) / 2.0,
        n.dot(p) / kSqrt2;
    return v;
}

ContactElement contact_lift(const Vec3& p, const Vec3& n, double tol) {
    if (std::abs(n.norm() - 1.0) > tol * 1e3)
        throw NonUnitNormal("normal has norm " + std::to_string(n.norm()));
    return {lift_point_sphere(p), lift_tangent_plane(p, n)};
}

// ---------------------------------------------------------------------------

std::pair<int, int> DupinElement::gram_signature(double tol) const {
    Eigen::Matrix3d gram;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) gram(i, j) = inner(basis[i], basis[j]);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(gram);
    int pos = 0, neg = 0;
    double scale = es.eigenvalues().cwiseAbs().maxCoeff();
    for (int i = 0; i < 3; ++i) {
        double ev = es.eigenvalues()(i);
        if (ev > tol * scale)
            ++pos;
        else if (ev < -tol * scale)
            ++neg;
    }
    return {pos, neg};
}

bool DupinElement::valid(double tol) const {
    auto [pos, neg] = gram_signature(tol);
    return pos == 2 && neg == 1;
}

// ---------------------------------------------------------------------------

double LieGroupElement::group_residual() const {
    const Mat6& g = metric();
    return (m.transpose() * g * m - g).cwiseAbs().maxCoeff();
}

bool LieGroupElement::valid(double tol) const {
    double s = m.cwiseAbs().maxCoeff();
    return group_residual() <= tol * s * s * 10.0 &&
           std::abs(m.determinant() - 1.0) <= tol * 1e3;
}

bool LieGroupElement::same_element(const LieGroupElement& other, double tol) const {
    double s = std::max(m.cwiseAbs().maxCoeff(), other.m.cwiseAbs().maxCoeff());
    return std::min((m - other.m).cwiseAbs().maxCoeff(),
                    (m + other.m).cwiseAbs().maxCoeff()) <= tol * 100.0 * s;
}

double LieAlgebraElement::algebra_residual() const {
    const Mat6& g = metric();
    return (m.transpose() * g + g * m).cwiseAbs().maxCoeff();
}

bool LieAlgebraElement::valid(double tol) const {
    double s = std::max(1.0, m.cwiseAbs().maxCoeff());
    return algebra_residual() <= tol * s * 10.0;
}

namespace {
void require_group(const LieGroupElement& a, double tol) {
    if (!a.valid(tol)) throw InvalidGroupElement("A^T g A != g or det != 1 beyond tolerance");
}
} // namespace

QuadricPoint group_action(const LieGroupElement& a, const QuadricPoint& q, double tol) {
    require_group(a, tol);
    return {a.m * q.rep};
}

ContactElement group_action(const LieGroupElement& a, const ContactElement& c, double tol) {
    require_group(a, tol);
    return {a.m * c.V, a.m * c.W};
}

DupinElement group_action(const LieGroupElement& a, const DupinElement& d, double tol) {
    require_group(a, tol);
    return {{a.m * d.basis[0], a.m * d.basis[1], a.m * d.basis[2]}};
}

LieGroupElement group_exp(const LieAlgebraElement& x) { return {x.m.exp()}; }

Mat6 project_to_group(const Mat6& a, int iterations) {
    const Mat6& g = metric();
    Mat6 x = a;
    for (int i = 0; i < iterations; ++i) {
        // A in the group satisfies A^{-1} = g A^T g; average with the
        // constraint-inverse to contract quadratically onto the group.
        Mat6 inv_c = g * x.transpose() * g;
        x = 0.5 * (x + inv_c.inverse());
    }
    return x;
}

LieAlgebraElement random_algebra_element(std::uint64_t seed, double scale) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-scale, scale);
    Mat6 k;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) k(i, j) = dist(rng);
    Mat6 anti = 0.5 * (k - k.transpose());
    // g X = antisymmetric  <=>  X in the algebra (g^2 = I).
    return {metric() * anti};
}

LieGroupElement random_group_element(std::uint64_t seed, double scale) {
    return group_exp(random_algebra_element(seed, scale));
}

// ---------------------------------------------------------------------------

std::vector<LieAlgebraElement> maurer_cartan(const std::vector<LieGroupElement>& frames,
                                             const MaurerCartanOptions& opts) {
    const int n = static_cast<int>(frames.size());
    if (n < 2) throw SignAlignmentFailure("need at least two samples");
    if (opts.fd_order == 4 && n < 5)
        throw SignAlignmentFailure("need at least five samples for fourth-order differences");

    // Resolve the +-I ambiguity sample to sample.
    std::vector<Mat6> a(n);
    a[0] = frames[0].m;
    for (int i = 1; i < n; ++i) {
        const Mat6& cur = frames[i].m;
        double dplus = (cur - a[i - 1]).norm();
        double dminus = (cur + a[i - 1]).norm();
        a[i] = dplus <= dminus ? cur : Mat6(-cur);
        double jump = std::min(dplus, dminus) / std::max(1.0, a[i - 1].norm());
        if (jump > opts.jump_tol)
            throw SignAlignmentFailure("frame jump " + std::to_string(jump) + " at sample " +
                                       std::to_string(i));
    }

    const double h = opts.step;
    std::vector<LieAlgebraElement> out(n);
    auto deriv = [&](int i) -> Mat6 {
        if (opts.fd_order == 4) {
            if (i >= 2 && i + 2 < n)
                return (-a[i + 2] + 8.0 * a[i + 1] - 8.0 * a[i - 1] + a[i - 2]) / (12.0 * h);
            // fall back to second order near the ends
        }
        if (i == 0) return (-3.0 * a[0] + 4.0 * a[1] - a[2]) / (2.0 * h);
        if (i == n - 1) return (3.0 * a[n - 1] - 4.0 * a[n - 2] + a[n - 3]) / (2.0 * h);
        return (a[i + 1] - a[i - 1]) / (2.0 * h);
    };
    for (int i = 0; i < n; ++i) {
        Mat6 da = deriv(i);
        out[i] = {a[i].partialPivLu().solve(da)};
    }
    return out;
}

double dupin_metric_eval(const LieAlgebraElement& w) {
    const Mat6& m = w.m;
    return m(1, 0) * m(0, 1) + m(0, 4) * m(4, 0) + m(2, 0) * m(0, 2) +
           2.0 * m(1, 3) * m(3, 1) - 0.5 * m(3, 2) * m(3, 2);
}

double dupin_metric_eval(const LieAlgebraElement& w1, const LieAlgebraElement& w2) {
    const Mat6& a = w1.m;
    const Mat6& b = w2.m;
    auto sym = [&](int i, int j, int k, int l) {
        return 0.5 * (a(i, j) * b(k, l) + b(i, j) * a(k, l));
    };
    return sym(1, 0, 0, 1) + sym(0, 4, 4, 0) + sym(2, 0, 0, 2) + 2.0 * sym(1, 3, 3, 1) -
           0.5 * a(3, 2) * b(3, 2);
}

// ---------------------------------------------------------------------------

Mat6 complete_frame(const Vec6& a0, const Vec6& a1, const Vec6& w2, const Vec6& w3) {
    const Mat6& g = metric();
    Mat6 frame = Mat6::Zero();
    frame.col(0) = a0;
    frame.col(1) = a1;

    // Orthonormalize the spacelike pair inside ell-perp.
    double n3 = inner(w3, w3);
    if (n3 <= 0.0) throw InvalidGroupElement("spacelike direction w3 has nonpositive norm");
    Vec6 a3 = w3 / std::sqrt(n3);
    Vec6 a2 = w2 - inner(w2, a3) * a3;
    double n2 = inner(a2, a2);
    if (n2 <= 0.0) throw InvalidGroupElement("spacelike direction w2 degenerate against w3");
    a2 /= std::sqrt(n2);
    frame.col(2) = a2;
    frame.col(3) = a3;

    // Null partners: solve the pairing conditions, then correct isotropy.
    Eigen::Matrix<double, 4, 6> pair_rows;
    pair_rows.row(0) = (g * a0).transpose();
    pair_rows.row(1) = (g * a1).transpose();
    pair_rows.row(2) = (g * a2).transpose();
    pair_rows.row(3) = (g * a3).transpose();

    Eigen::Matrix<double, 4, 1> rhs5;
    rhs5 << -1.0, 0.0, 0.0, 0.0;
    Vec6 w5 = pair_rows.completeOrthogonalDecomposition().solve(rhs5);
    Vec6 a5 = w5 + 0.5 * inner(w5, w5) * a0;

    Eigen::Matrix<double, 5, 6> pair_rows5;
    pair_rows5.topRows<4>() = pair_rows;
    pair_rows5.row(4) = (g * a5).transpose();
    Eigen::Matrix<double, 5, 1> rhs4;
    rhs4 << 0.0, -1.0, 0.0, 0.0, 0.0;
    Vec6 w4 = pair_rows5.completeOrthogonalDecomposition().solve(rhs4);
    Vec6 a4 = w4 + 0.5 * inner(w4, w4) * a1;

    frame.col(4) = a4;
    frame.col(5) = a5;

    double residual = (frame.transpose() * g * frame - g).cwiseAbs().maxCoeff();
    double scale = frame.cwiseAbs().maxCoeff();
    if (!(residual < 1e-6 * std::max(1.0, scale * scale)))
        throw InvalidGroupElement("frame completion failed, Gram residual " +
                                  std::to_string(residual));

    if (frame.determinant() < 0.0) frame.col(2) = -frame.col(2);
    return frame;
}

std::array<Vec6, 3> witt_basis_21(const Vec6& x0, const Vec6& x1, const Vec6& x2) {
    // x0 is null inside a signature-(2,1) space spanned by (x0, x1, x2).
    double s = std::max({x0.norm(), x1.norm(), x2.norm()});
    if (std::abs(inner(x0, x0)) > 1e-8 * s * s)
        throw SignatureFailure("leading basis vector is not null");

    double c1 = inner(x0, x1);
    double c2 = inner(x0, x2);
    Vec6 w5;
    // Partner with <x0, w5> = -1 chosen from the better-paired generator.
    if (std::abs(c1) >= std::abs(c2)) {
        if (std::abs(c1) < 1e-12 * s * s) throw SignatureFailure("degenerate pairing in 3-plane");
        w5 = x1 / (-c1);
    } else {
        w5 = x2 / (-c2);
    }
    Vec6 h5 = w5 + 0.5 * inner(w5, w5) * x0;

    // Spacelike completion within the 3-plane.
    Vec6 cand = (std::abs(c1) >= std::abs(c2)) ? x2 : x1;
    Vec6 h3 = cand + inner(cand, h5) * x0 + inner(cand, x0) * h5;
    double n3 = inner(h3, h3);
    if (n3 <= 0.0) throw SignatureFailure("3-plane does not have signature (2,1)");
    h3 /= std::sqrt(n3);
    return {x0, h3, h5};
}

Mat6 dupin_adapted_frame(const DupinElement& d) {
    // Find a null vector inside the plane, then a Witt basis, then complete.
    Eigen::Matrix3d gram;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) gram(i, j) = inner(d.basis[i], d.basis[j]);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(gram);
    const auto& ev = es.eigenvalues();
    double scale = ev.cwiseAbs().maxCoeff();
    if (!(ev(0) < -1e-9 * scale && ev(1) > 1e-9 * scale && ev(2) > 1e-9 * scale))
        throw SignatureFailure("plane is not of signature (2,1)");

    auto from_coeff = [&](const Eigen::Vector3d& c) {
        return Vec6(c[0] * d.basis[0] + c[1] * d.basis[1] + c[2] * d.basis[2]);
    };
    Vec6 eminus = from_coeff(es.eigenvectors().col(0) / std::sqrt(-ev(0)));
    Vec6 eplus = from_coeff(es.eigenvectors().col(1) / std::sqrt(ev(1)));
    Vec6 null0 = (eplus + eminus) / std::sqrt(2.0);

    auto wb = witt_basis_21(null0, from_coeff(es.eigenvectors().col(2)), eplus - eminus);

    // Complement: project fixed candidates off the plane, then Witt again.
    auto project_off = [&](const Vec6& x) {
        return Vec6(x + inner(x, wb[2]) * wb[0] + inner(x, wb[0]) * wb[2] -
                    inner(x, wb[1]) * wb[1]);
    };
    std::array<Vec6, 3> comp;
    int found = 0;
    for (int i = 0; i < 6 && found < 3; ++i) {
        Vec6 c = project_off(basis_vector(i));
        // reject components already represented
        for (int j = 0; j < found; ++j) {
            double cj = inner(c, comp[j]);
            (void)cj;
        }
        Eigen::Matrix<double, 6, 4> m;
        for (int j = 0; j < found; ++j) m.col(j) = comp[j];
        m.col(found) = c;
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(m.leftCols(found + 1));
        if (svd.singularValues()(found) > 1e-6 * svd.singularValues()(0)) comp[found++] = c;
    }
    if (found < 3) throw SignatureFailure("failed to build complement basis");

    // Gram-Schmidt with signs in the (2,1) complement: find a positive vector
    // first, then build the null pair.
    Eigen::Matrix3d cg;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) cg(i, j) = inner(comp[i], comp[j]);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> ces(cg);
    const auto& cev = ces.eigenvalues();
    double cscale = cev.cwiseAbs().maxCoeff();
    if (!(cev(0) < -1e-9 * cscale && cev(1) > 1e-9 * cscale && cev(2) > 1e-9 * cscale))
        throw SignatureFailure("complement is not of signature (2,1)");
    auto cfrom = [&](const Eigen::Vector3d& c) {
        return Vec6(c[0] * comp[0] + c[1] * comp[1] + c[2] * comp[2]);
    };
    Vec6 fminus = cfrom(ces.eigenvectors().col(0) / std::sqrt(-cev(0)));
    Vec6 fplus = cfrom(ces.eigenvectors().col(1) / std::sqrt(cev(1)));
    Vec6 f2 = cfrom(ces.eigenvectors().col(2) / std::sqrt(cev(2)));

    Vec6 a1 = (fplus + fminus) / std::sqrt(2.0);
    Vec6 a4 = -(fplus - fminus) / std::sqrt(2.0);

    Mat6 frame;
    frame.col(0) = wb[0];
    frame.col(1) = a1;
    frame.col(2) = f2;
    frame.col(3) = wb[1];
    frame.col(4) = a4;
    frame.col(5) = wb[2];
    if (frame.determinant() < 0.0) frame.col(2) = -frame.col(2);

    const Mat6& g = metric();
    double res = (frame.transpose() * g * frame - g).cwiseAbs().maxCoeff();
    if (!(res < 1e-6)) throw SignatureFailure("adapted frame Gram residual " + std::to_string(res));
    return frame;
}

} // namespace liegeo
