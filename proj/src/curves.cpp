#include "liegeo/curves.hpp"

#include <cmath>

namespace liegeo {

Mat6 frenet_coefficient_matrix(double k0, double k1, double k2, double k3) {
    Mat6 m = Mat6::Zero();
    m(0, 0) = k0;
    m(0, 1) = 1;
    m(0, 3) = k1;
    m(0, 4) = k3;
    m(1, 0) = -1;
    m(1, 1) = -k0;
    m(1, 2) = k2;
    m(1, 5) = -k3;
    m(2, 1) = -1;
    m(2, 4) = k2;
    m(3, 0) = 1;
    m(3, 5) = k1;
    m(4, 2) = -1;
    m(4, 4) = k0;
    m(4, 5) = -1;
    m(5, 3) = 1;
    m(5, 4) = 1;
    m(5, 5) = -k0;
    return m;
}

// ---------------------------------------------------------------------------
// Finite differences on vector samples

namespace {

Vec6 fd1(const std::vector<Vec6>& f, int i, double h) {
    const int n = static_cast<int>(f.size());
    if (i >= 2 && i + 2 < n)
        return (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]) / (12.0 * h);
    if (i >= 1 && i + 1 < n) return (f[i + 1] - f[i - 1]) / (2.0 * h);
    if (i == 0) return (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    return (3.0 * f[i] - 4.0 * f[i - 1] + f[i - 2]) / (2.0 * h);
}

Vec6 fd2(const std::vector<Vec6>& f, int i, double h) {
    const int n = static_cast<int>(f.size());
    if (i >= 1 && i + 1 < n) return (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (h * h);
    if (i == 0) return (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / (h * h);
    return (2.0 * f[i] - 5.0 * f[i - 1] + 4.0 * f[i - 2] - f[i - 3]) / (h * h);
}

// Higher derivatives used only for rank reports; interior stencils, clamped
// toward the boundary.
Vec6 fd_high(const std::vector<Vec6>& f, int order, int i, double h) {
    const int n = static_cast<int>(f.size());
    const int r = (order + 1) / 2 + 1;
    int c = std::min(std::max(i, r), n - 1 - r);
    auto at = [&](int off) { return f[c + off]; };
    double h3 = h * h * h;
    switch (order) {
        case 3:
            return (at(2) - 2.0 * at(1) + 2.0 * at(-1) - at(-2)) / (2.0 * h3);
        case 4:
            return (at(2) - 4.0 * at(1) + 6.0 * at(0) - 4.0 * at(-1) + at(-2)) / (h3 * h);
        case 5:
            return (at(3) - 4.0 * at(2) + 5.0 * at(1) - 5.0 * at(-1) + 4.0 * at(-2) - at(-3)) /
                   (2.0 * h3 * h * h);
        default:
            throw InsufficientOrder("unsupported derivative order");
    }
}

} // namespace

LegendreCurveSamples::Residuals LegendreCurveSamples::residuals() const {
    Residuals r{0.0, 0.0, 0.0};
    const int n = size();
    double scale = 0.0;
    for (int i = 0; i < n; ++i)
        scale = std::max({scale, V0[i].squaredNorm(), V1[i].squaredNorm()});
    for (int i = 0; i < n; ++i) {
        r.isotropy = std::max({r.isotropy, std::abs(inner(V0[i], V0[i])),
                               std::abs(inner(V1[i], V1[i])), std::abs(inner(V0[i], V1[i]))});
        Vec6 d0 = fd1(V0, i, dt);
        Vec6 d1 = fd1(V1, i, dt);
        r.v0_dv1 = std::max(r.v0_dv1, std::abs(inner(V0[i], d1)));
        r.dv0_v1 = std::max(r.dv0_v1, std::abs(inner(d0, V1[i])));
    }
    if (scale > 0.0) {
        r.isotropy /= scale;
        // derivative residuals carry one length scale of the parameter
        double dscale = scale / std::max(dt, 1e-300);
        r.v0_dv1 /= dscale;
        r.dv0_v1 /= dscale;
    }
    return r;
}

bool LegendreCurveSamples::valid(double tol) const {
    auto r = residuals();
    return r.isotropy <= tol && r.v0_dv1 <= tol && r.dv0_v1 <= tol;
}

Vec6 PolarizationSection::derivative(int order, int i) const {
    if (order == 0) return V[i];
    if (!exact_derivs.empty() && static_cast<int>(exact_derivs.size()) >= order)
        return exact_derivs[order - 1][i];
    if (size() < 2 * order + 1)
        throw InsufficientOrder("not enough samples for derivative order " +
                                std::to_string(order));
    switch (order) {
        case 1:
            return fd1(V, i, dt);
        case 2:
            return fd2(V, i, dt);
        default:
            return fd_high(V, order, i, dt);
    }
}

std::vector<bool> is_linearly_full(const LegendreCurveSamples& c, double tol) {
    const int n = c.size();
    if (n < 3) throw InsufficientOrder("need at least three samples");
    std::vector<bool> out(n);
    for (int i = 0; i < n; ++i) {
        Mat6 m;
        m.col(0) = c.V0[i];
        m.col(1) = c.V1[i];
        m.col(2) = fd1(c.V0, i, c.dt);
        m.col(3) = fd1(c.V1, i, c.dt);
        m.col(4) = fd2(c.V0, i, c.dt);
        m.col(5) = fd2(c.V1, i, c.dt);
        double scale = 1.0;
        for (int j = 0; j < 6; ++j) scale *= std::max(m.col(j).norm(), 1e-300);
        out[i] = std::abs(m.determinant()) > tol * scale;
    }
    return out;
}

std::vector<int> fatness_rank(const PolarizationSection& p, double tol) {
    const int n = p.size();
    std::vector<int> out(n);
    for (int i = 0; i < n; ++i) {
        Mat6 m;
        for (int k = 0; k < 6; ++k) m.col(k) = p.derivative(k, i);
        Eigen::JacobiSVD<Mat6> svd(m);
        const auto& sv = svd.singularValues();
        int rank = 0;
        for (int k = 0; k < 6; ++k)
            if (sv(k) > tol * sv(0)) ++rank;
        out[i] = rank;
    }
    return out;
}

std::vector<DupinElement> directrix(const PolarizationSection& p, double tol) {
    const int n = p.size();
    std::vector<DupinElement> out(n);
    for (int i = 0; i < n; ++i) {
        Vec6 v = p.V[i];
        Vec6 v1 = p.derivative(1, i);
        Vec6 v2 = p.derivative(2, i);
        Eigen::Matrix<double, 6, 3> m;
        m.col(0) = v;
        m.col(1) = v1;
        m.col(2) = v2;
        Eigen::JacobiSVD<Eigen::Matrix<double, 6, 3>> svd(m);
        if (svd.singularValues()(2) <= tol * svd.singularValues()(0))
            throw FatnessFailure("osculating 2-jet has rank < 3 at sample " + std::to_string(i));
        out[i] = DupinElement{{v, v1, v2}};
        if (!out[i].valid(1e-7))
            throw SignatureFailure("osculating plane is not of signature (2,1) at sample " +
                                   std::to_string(i));
    }
    return out;
}

PolarizationReport is_polarization(const PolarizationSection& p, double tol) {
    auto planes = directrix(p, tol);
    const int n = p.size();

    // Build a continuous family of frames adapted to the osculating planes,
    // then pull back the Dupin metric through the Maurer-Cartan form.
    std::vector<LieGroupElement> frames(n);
    const Mat6& g = metric();
    for (int i = 0; i < n; ++i) {
        Vec6 v = p.V[i];
        Vec6 v1 = p.derivative(1, i);
        Vec6 v2 = p.derivative(2, i);

        // <v, v2> = -<v1,v1> < 0 pins the pairing branch deterministically.
        double c2 = inner(v, v2);
        if (std::abs(c2) < 1e-14)
            throw SignatureFailure("degenerate osculating pairing at sample " + std::to_string(i));
        Vec6 w5 = v2 / (-c2);
        Vec6 h5 = w5 + 0.5 * inner(w5, w5) * v;
        Vec6 h3 = v1 + inner(v1, h5) * v + inner(v1, v) * h5;
        double n3 = inner(h3, h3);
        if (n3 <= 0.0) throw SignatureFailure("osculating plane degenerate at sample " +
                                              std::to_string(i));
        h3 /= std::sqrt(n3);

        // Complement of the plane: project fixed candidates, pick the two
        // best-conditioned spacelike ones plus one timelike remainder.
        auto project_off = [&](const Vec6& x) {
            return Vec6(x + inner(x, h5) * v + inner(x, v) * h5 - inner(x, h3) * h3);
        };
        std::array<Vec6, 6> cand;
        for (int k = 0; k < 6; ++k) cand[k] = project_off(basis_vector(k));

        // Gram-Schmidt with signs: first a spacelike unit, then a Lorentz pair.
        int first = -1;
        double best = 0.0;
        for (int k = 0; k < 6; ++k) {
            double q = inner(cand[k], cand[k]);
            if (q > best) {
                best = q;
                first = k;
            }
        }
        if (first < 0) throw SignatureFailure("complement has no spacelike candidate");
        Vec6 e2 = cand[first] / std::sqrt(best);

        // Residual (1,1) plane: find the two most independent reduced candidates.
        std::array<Vec6, 6> red;
        for (int k = 0; k < 6; ++k) red[k] = cand[k] - inner(cand[k], e2) * e2;
        int ia = -1, ib = -1;
        double bestn = 0.0;
        for (int k = 0; k < 6; ++k) {
            double q = red[k].squaredNorm();
            if (q > bestn) {
                bestn = q;
                ia = k;
            }
        }
        Vec6 da = red[ia];
        double bestd = 0.0;
        for (int k = 0; k < 6; ++k) {
            if (k == ia) continue;
            Eigen::Matrix<double, 6, 2> mm;
            mm.col(0) = da;
            mm.col(1) = red[k];
            Eigen::JacobiSVD<Eigen::Matrix<double, 6, 2>> svd(mm);
            if (svd.singularValues()(1) > bestd) {
                bestd = svd.singularValues()(1);
                ib = k;
            }
        }
        Vec6 db = red[ib];
        // Null directions of the Lorentz plane span(da, db).
        double al = inner(da, da), be = inner(da, db), ga = inner(db, db);
        double disc = be * be - al * ga;
        if (disc <= 0.0) throw SignatureFailure("complement is not Lorentzian");
        double sq = std::sqrt(disc);
        Vec6 np, nm;
        if (std::abs(al) > 1e-12 * std::max(std::abs(be), std::abs(ga))) {
            np = da * ((-be + sq) / al) + db;
            nm = da * ((-be - sq) / al) + db;
        } else {
            np = da;
            nm = db - da * (ga / (2.0 * be));
        }
        double pairing = inner(np, nm);
        if (std::abs(pairing) < 1e-14) throw SignatureFailure("null pair degenerate");
        Vec6 a1 = np / np.norm();
        Vec6 a4 = nm / (-inner(a1, nm));

        Mat6 fm;
        fm.col(0) = v;
        fm.col(1) = a1;
        fm.col(2) = e2;
        fm.col(3) = h3;
        fm.col(4) = a4;
        fm.col(5) = h5;
        if (fm.determinant() < 0.0) fm.col(2) = -fm.col(2);
        double res = (fm.transpose() * g * fm - g).cwiseAbs().maxCoeff();
        if (!(res < 1e-6))
            throw SignatureFailure("adapted frame residual " + std::to_string(res));
        frames[i] = {fm};
    }

    MaurerCartanOptions mopts;
    mopts.step = p.dt;
    mopts.fd_order = 2;
    auto omega = maurer_cartan(frames, mopts);

    PolarizationReport rep;
    rep.pullback.resize(n);
    rep.mu.resize(n);
    bool nowhere_zero = true;
    for (int i = 0; i < n; ++i) {
        double val = dupin_metric_eval(omega[i]);
        rep.pullback[i] = val;
        rep.mu[i] = val < 0.0 ? std::sqrt(-val) : 0.0;
        if (std::abs(val) <= tol) nowhere_zero = false;
    }
    rep.is_polarization = nowhere_zero;
    return rep;
}

// ---------------------------------------------------------------------------
// Frenet reduction

namespace {

// G0 block element X(D,B,Y,b) acting by right multiplication on frames.
Mat6 g0_element(const Eigen::Matrix2d& D, const Eigen::Matrix2d& B, const Eigen::Matrix2d& Y,
                double b) {
    Eigen::Matrix2d J;
    J << 0, 1, 1, 0;
    Eigen::Matrix2d Ystar = J.transpose() * Y * J; // actually J^T Y J with J^T = J
    Eigen::Matrix2d skew;
    skew << 0, -b, b, 0;
    Eigen::Matrix2d Z = 0.5 * D * J * (Y.transpose() * Y + skew);
    Eigen::Matrix2d Dstar = J * D * J;
    Mat6 x = Mat6::Zero();
    x.block<2, 2>(0, 0) = D;
    x.block<2, 2>(0, 2) = D * Ystar * J * B;
    x.block<2, 2>(0, 4) = Z;
    x.block<2, 2>(2, 2) = B;
    x.block<2, 2>(2, 4) = Y;
    x.block<2, 2>(4, 4) = Dstar.inverse();
    return x;
}

std::vector<LieAlgebraElement> curve_mc(const std::vector<LieGroupElement>& fr, double dt,
                                        int fd_order) {
    MaurerCartanOptions mo;
    mo.step = dt;
    mo.fd_order = fd_order;
    mo.jump_tol = 1e9; // continuity is maintained by construction here
    return maurer_cartan(fr, mo);
}

} // namespace

FrenetData frenet_frame(const LegendreCurveSamples& c, const PolarizationSection& p,
                        const FrenetOptions& opts) {
    const int n = c.size();
    if (n < 5) throw InsufficientOrder("need at least five samples");
    if (p.size() != n) throw InsufficientOrder("section sample count mismatch");

    auto full = is_linearly_full(c, 1e-12);
    for (int i = 0; i < n; ++i)
        if (!full[i]) throw NotLinearlyFull("curve fails linear fullness at sample " +
                                            std::to_string(i));

    const int anchor = n / 2;

    // Stage 0: frames with R0 along the section, R1 completing the plane.
    auto build_stage0 = [&](double section_sign) {
        std::vector<LieGroupElement> fr(n);
        Vec6 prev0 = Vec6::Zero(), prev1 = Vec6::Zero();
        // pick the plane generator most transverse to the section at the anchor
        Vec6 va = p.V[anchor].normalized();
        bool use_v1 = std::abs(c.V1[anchor].normalized().dot(va)) <
                      std::abs(c.V0[anchor].normalized().dot(va));
        for (int i = 0; i < n; ++i) {
            Vec6 r0 = section_sign * p.V[i] / p.V[i].norm();
            Vec6 w = use_v1 ? c.V1[i] : c.V0[i];
            Vec6 r1 = (w - w.dot(r0) * r0);
            r1 /= r1.norm();
            if (i > 0) {
                if (r0.dot(prev0) < 0.0) r0 = -r0; // keep the sweep continuous
                if (r1.dot(prev1) < 0.0) r1 = -r1;
            }
            prev0 = r0;
            prev1 = r1;

            // spacelike candidates inside ell-perp, fixed choice of seeds
            Eigen::Matrix2d m;
            m << r0.dot(r0), r0.dot(r1), r0.dot(r1), r1.dot(r1);
            Eigen::Matrix2d minv = m.inverse();
            auto proj = [&](const Vec6& x) {
                Eigen::Vector2d rhs(inner(r0, x), inner(r1, x));
                Eigen::Vector2d cvec = minv * rhs;
                return Vec6(x - cvec[0] * (metric() * r0) - cvec[1] * (metric() * r1));
            };
            // greedy pick of two seeds at the anchor held fixed elsewhere
            static thread_local int seed_a = -1, seed_b = -1;
            if (i == 0) {
                double best = -1.0;
                for (int k = 0; k < 6; ++k) {
                    Vec6 pk = proj(basis_vector(k));
                    double q = inner(pk, pk);
                    if (q > best) {
                        best = q;
                        seed_a = k;
                    }
                }
                double best2 = -1.0;
                Vec6 pa = proj(basis_vector(seed_a));
                pa /= std::sqrt(inner(pa, pa));
                for (int k = 0; k < 6; ++k) {
                    if (k == seed_a) continue;
                    Vec6 pk = proj(basis_vector(k));
                    double q = inner(pk, pk) - inner(pk, pa) * inner(pk, pa);
                    if (q > best2) {
                        best2 = q;
                        seed_b = k;
                    }
                }
            }
            Vec6 w3 = proj(basis_vector(seed_a));
            Vec6 w2 = proj(basis_vector(seed_b));
            fr[i] = {complete_frame(r0, r1, w2, w3)};
        }
        return fr;
    };

    auto frames = build_stage0(1.0);

    // Orientation invariant at the anchor: after the rotation gauge the
    // product rho30 * rho21 must be negative; it equals c3 e2 - c2 e3.
    {
        auto rho = curve_mc(frames, c.dt, opts.fd_order);
        const Mat6& m = rho[anchor].m;
        double invariant = m(3, 0) * m(2, 1) - m(2, 0) * m(3, 1);
        if (std::abs(invariant) < opts.degeneracy_tol)
            throw NotPolarized("degenerate first-order data at the anchor sample");
        if (invariant > 0.0) frames = build_stage0(-1.0);
    }

    auto apply_gauge = [&](const std::vector<Mat6>& x) {
        for (int i = 0; i < n; ++i) frames[i].m = frames[i].m * x[i];
    };

    // Stage 1a: rotate (R2,R3) so dR0 points along R3 with positive coefficient.
    {
        auto rho = curve_mc(frames, c.dt, opts.fd_order);
        std::vector<Mat6> x(n);
        for (int i = 0; i < n; ++i) {
            double c2 = rho[i].m(2, 0), c3 = rho[i].m(3, 0);
            double nr = std::hypot(c2, c3);
            if (nr < opts.degeneracy_tol)
                throw NotLinearlyFull("sigma_L stalls at sample " + std::to_string(i));
            double ct = c3 / nr, st = -c2 / nr;
            Eigen::Matrix2d B;
            B << ct, -st, st, ct;
            x[i] = g0_element(Eigen::Matrix2d::Identity(), B, Eigen::Matrix2d::Zero(), 0.0);
        }
        apply_gauge(x);
    }

    // Stage 1b: kill rho31 and set rho21 = -rho30 with det-positive D.
    {
        auto rho = curve_mc(frames, c.dt, opts.fd_order);
        std::vector<Mat6> x(n);
        for (int i = 0; i < n; ++i) {
            double c3 = rho[i].m(3, 0);
            double e2 = rho[i].m(2, 1), e3 = rho[i].m(3, 1);
            if (std::abs(e2) < opts.degeneracy_tol || c3 * e2 > 0.0)
                throw NotPolarized("first-order normalization impossible at sample " +
                                   std::to_string(i));
            double d1 = -c3 / e2;
            double d01 = -d1 * e3 / c3;
            Eigen::Matrix2d D;
            D << 1.0, d01, 0.0, d1;
            x[i] = g0_element(D, Eigen::Matrix2d::Identity(), Eigen::Matrix2d::Zero(), 0.0);
        }
        apply_gauge(x);
    }

    // Stage 2: off-diagonal Y kills rho10 + rho01 and rho32.
    {
        auto rho = curve_mc(frames, c.dt, opts.fd_order);
        std::vector<Mat6> x(n);
        for (int i = 0; i < n; ++i) {
            const Mat6& m = rho[i].m;
            double r30 = m(3, 0);
            double sum = -(m(1, 0) + m(0, 1)) / r30;
            double tw = -m(3, 2) / r30;
            double y21 = 0.5 * (tw + sum);
            double y12 = 0.5 * (tw - sum);
            Eigen::Matrix2d Y;
            Y << 0.0, y12, y21, 0.0;
            x[i] = g0_element(Eigen::Matrix2d::Identity(), Eigen::Matrix2d::Identity(), Y, 0.0);
        }
        apply_gauge(x);
    }

    // Stage 3: scale so rho30 = rho01 (= mu).
    {
        auto rho = curve_mc(frames, c.dt, opts.fd_order);
        std::vector<Mat6> x(n);
        for (int i = 0; i < n; ++i) {
            double r30 = rho[i].m(3, 0);
            double r01 = rho[i].m(0, 1);
            if (std::abs(r01) < opts.degeneracy_tol)
                throw NotPolarized("line element vanishes at sample " + std::to_string(i));
            double r = r01 / r30;
            Eigen::Matrix2d D = r * Eigen::Matrix2d::Identity();
            x[i] = g0_element(D, Eigen::Matrix2d::Identity(), Eigen::Matrix2d::Zero(), 0.0);
        }
        apply_gauge(x);
    }

    // Stage 4: diagonal Y difference kills rho11 + rho00.
    {
        auto rho = curve_mc(frames, c.dt, opts.fd_order);
        std::vector<Mat6> x(n);
        for (int i = 0; i < n; ++i) {
            const Mat6& m = rho[i].m;
            double mu = m(0, 1);
            double y11 = -(m(0, 0) + m(1, 1)) / (2.0 * mu);
            Eigen::Matrix2d Y = Eigen::Matrix2d::Zero();
            Y(0, 0) = y11;
            Y(1, 1) = -y11;
            x[i] = g0_element(Eigen::Matrix2d::Identity(), Eigen::Matrix2d::Identity(), Y, 0.0);
        }
        apply_gauge(x);
    }

    // Stage 5: equal diagonal Y and b kill rho02 and rho13.
    {
        auto rho = curve_mc(frames, c.dt, opts.fd_order);
        std::vector<Mat6> x(n);
        for (int i = 0; i < n; ++i) {
            const Mat6& m = rho[i].m;
            double mu = m(0, 1);
            double y = (m(1, 3) - m(0, 2)) / (2.0 * mu);
            double b = -(m(0, 2) + m(1, 3)) / mu;
            Eigen::Matrix2d Y = y * Eigen::Matrix2d::Identity();
            x[i] = g0_element(Eigen::Matrix2d::Identity(), Eigen::Matrix2d::Identity(), Y, b);
        }
        apply_gauge(x);
    }

    // Read off the line element and curvatures; report the pattern residual.
    FrenetData out;
    out.t0 = c.t0;
    out.dt = c.dt;
    out.frames = frames;
    out.mu.resize(n);
    out.k0.resize(n);
    out.k1.resize(n);
    out.k2.resize(n);
    out.k3.resize(n);
    auto rho = curve_mc(frames, c.dt, opts.fd_order);
    double resid = 0.0;
    for (int i = 0; i < n; ++i) {
        const Mat6& m = rho[i].m;
        double mu = m(0, 1);
        out.mu[i] = mu;
        out.k0[i] = m(0, 0) / mu;
        out.k1[i] = m(0, 3) / mu;
        out.k2[i] = m(1, 2) / mu;
        out.k3[i] = m(0, 4) / mu;
        Mat6 expected = mu * frenet_coefficient_matrix(out.k0[i], out.k1[i], out.k2[i], out.k3[i]);
        resid = std::max(resid, (m - expected).cwiseAbs().maxCoeff() / std::abs(mu));
    }
    out.pattern_residual = resid;
    return out;
}

// ---------------------------------------------------------------------------

CurveSynthesisResult curve_from_curvatures(const std::function<double(double)>& k0,
                                           const std::function<double(double)>& k1,
                                           const std::function<double(double)>& k2,
                                           const std::function<double(double)>& k3,
                                           const std::function<double(double)>& mu_coeff,
                                           const LieGroupElement& frame0, double t0, double dt,
                                           int n) {
    auto rhs = [&](double t, const Mat6& r) -> Mat6 {
        return r * (mu_coeff(t) * frenet_coefficient_matrix(k0(t), k1(t), k2(t), k3(t)));
    };

    CurveSynthesisResult out;
    out.curve.t0 = t0;
    out.curve.dt = dt;
    out.section.t0 = t0;
    out.section.dt = dt;
    out.frenet.t0 = t0;
    out.frenet.dt = dt;

    Mat6 r = frame0.m;
    for (int i = 0; i < n; ++i) {
        double t = t0 + i * dt;
        out.curve.V0.push_back(r.col(0));
        out.curve.V1.push_back(r.col(1));
        out.section.V.push_back(r.col(0));
        out.frenet.frames.push_back({r});
        out.frenet.mu.push_back(mu_coeff(t));
        out.frenet.k0.push_back(k0(t));
        out.frenet.k1.push_back(k1(t));
        out.frenet.k2.push_back(k2(t));
        out.frenet.k3.push_back(k3(t));
        if (i + 1 == n) break;

        Mat6 f1 = rhs(t, r);
        Mat6 f2 = rhs(t + dt / 2, r + (dt / 2) * f1);
        Mat6 f3 = rhs(t + dt / 2, r + (dt / 2) * f2);
        Mat6 f4 = rhs(t + dt, r + dt * f3);
        r = r + (dt / 6) * (f1 + 2 * f2 + 2 * f3 + f4);
        r = project_to_group(r, 2);
        if (!r.allFinite() || LieGroupElement{r}.group_residual() > 1e-6)
            throw StepFailure("group projection diverged at step " + std::to_string(i));
    }
    return out;
}

std::vector<Series1> frenet_frame_series(const Series1& k0, const Series1& k1,
                                         const Series1& k2, const Series1& k3,
                                         const Series1& mu_coeff, const LieGroupElement& frame0,
                                         int order) {
    // Entry series of M(t) = mu(t) * coefficient matrix(k(t)).
    std::vector<Series1> msys(36, Series1(order));
    auto set = [&](int i, int j, const Series1& s) { msys[i * 6 + j] = s * mu_coeff; };
    Series1 one(order, 1.0);
    set(0, 0, k0);
    set(0, 1, one);
    set(0, 3, k1);
    set(0, 4, k3);
    set(1, 0, -one);
    set(1, 1, -k0);
    set(1, 2, k2);
    set(1, 5, -k3);
    set(2, 1, -one);
    set(2, 4, k2);
    set(3, 0, one);
    set(3, 5, k1);
    set(4, 2, -one);
    set(4, 4, k0);
    set(4, 5, -one);
    set(5, 3, one);
    set(5, 4, one);
    set(5, 5, -k0);

    // March R' = R M coefficient by coefficient.
    std::vector<Series1> r(36, Series1(order));
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) r[i * 6 + j].at(0) = frame0.m(i, j);
    for (int d = 0; d < order; ++d) {
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) {
                double acc = 0.0;
                for (int k = 0; k < 6; ++k) {
                    const Series1& a = r[i * 6 + k];
                    const Series1& b = msys[k * 6 + j];
                    for (int s = 0; s <= d; ++s) acc += a[s] * b[d - s];
                }
                r[i * 6 + j].at(d + 1) = acc / (d + 1);
            }
    }
    return r;
}

Series1 series_entry(const std::vector<Series1>& m, int i, int j) { return m[i * 6 + j]; }

} // namespace liegeo
