#include "liegeo/surface.hpp"

#include <cmath>

#include "liegeo/parallel.hpp"

namespace liegeo {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;

// One-dimensional difference stencils (weights exclude the 1/h factor).
struct Stencil {
    int count = 0;
    std::array<int, 7> offset{};
    std::array<double, 7> weight{};
};

Stencil d1_stencil(int i, int n, int fd_order) {
    Stencil s;
    auto set = [&](std::initializer_list<int> off, std::initializer_list<double> w) {
        s.count = static_cast<int>(off.size());
        int k = 0;
        for (int o : off) s.offset[k++] = o;
        k = 0;
        for (double x : w) s.weight[k++] = x;
    };
    if (fd_order >= 4 && n >= 5) {
        if (i >= 2 && i + 2 < n)
            set({-2, -1, 1, 2}, {1.0 / 12, -8.0 / 12, 8.0 / 12, -1.0 / 12});
        else if (i == 0)
            set({0, 1, 2, 3, 4}, {-25.0 / 12, 48.0 / 12, -36.0 / 12, 16.0 / 12, -3.0 / 12});
        else if (i == 1)
            set({-1, 0, 1, 2, 3}, {-3.0 / 12, -10.0 / 12, 18.0 / 12, -6.0 / 12, 1.0 / 12});
        else if (i == n - 2)
            set({-3, -2, -1, 0, 1}, {-1.0 / 12, 6.0 / 12, -18.0 / 12, 10.0 / 12, 3.0 / 12});
        else
            set({-4, -3, -2, -1, 0}, {3.0 / 12, -16.0 / 12, 36.0 / 12, -48.0 / 12, 25.0 / 12});
        return s;
    }
    if (n < 3) throw InsufficientOrder("grid too small for differences");
    if (i >= 1 && i + 1 < n)
        set({-1, 1}, {-0.5, 0.5});
    else if (i == 0)
        set({0, 1, 2}, {-1.5, 2.0, -0.5});
    else
        set({-2, -1, 0}, {0.5, -2.0, 1.5});
    return s;
}

template <class T, class Get>
T apply_stencil_u(const Get& get, int i, int j, int nu, double h, int fd_order) {
    Stencil s = d1_stencil(i, nu, fd_order);
    T acc = s.weight[0] * get(i + s.offset[0], j);
    for (int k = 1; k < s.count; ++k) acc += s.weight[k] * get(i + s.offset[k], j);
    return T(acc / h);
}

template <class T, class Get>
T apply_stencil_v(const Get& get, int i, int j, int nv, double h, int fd_order) {
    Stencil s = d1_stencil(j, nv, fd_order);
    T acc = s.weight[0] * get(i, j + s.offset[0]);
    for (int k = 1; k < s.count; ++k) acc += s.weight[k] * get(i, j + s.offset[k]);
    return T(acc / h);
}

// Root direction of a positive-semidefinite binary quadratic
// q(x,y) = al x^2 + 2 be x y + ga y^2 with vanishing determinant.
Eigen::Vector2d psd_root(double al, double be, double ga) {
    Eigen::Vector2d dir;
    if (al >= ga)
        dir << -be, al;
    else
        dir << ga, -be;
    double n = dir.norm();
    if (n == 0.0) return Eigen::Vector2d(1.0, 0.0);
    return dir / n;
}

Eigen::Matrix2d offdiag(double y12, double y21) {
    Eigen::Matrix2d y;
    y << 0.0, y12, y21, 0.0;
    return y;
}

// G0 block element (shared with the curve reduction; local copy).
Mat6 g0_block(const Eigen::Matrix2d& D, const Eigen::Matrix2d& B, const Eigen::Matrix2d& Y,
              double b) {
    Eigen::Matrix2d J;
    J << 0, 1, 1, 0;
    Eigen::Matrix2d Ystar = J * Y * J;
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

struct McField {
    std::vector<Mat6> mu, mv; // A^{-1} dA along u and v
};

McField frame_maurer_cartan(const GridShape& g, const std::vector<Mat6>& frames, int fd_order) {
    McField out;
    out.mu.resize(g.count());
    out.mv.resize(g.count());
    parallel_for(0, g.nu, [&](int i) {
        for (int j = 0; j < g.nv; ++j) {
            auto get = [&](int ii, int jj) -> const Mat6& { return frames[g.idx(ii, jj)]; };
            Mat6 dau = apply_stencil_u<Mat6>(get, i, j, g.nu, g.du, fd_order);
            Mat6 dav = apply_stencil_v<Mat6>(get, i, j, g.nv, g.dv, fd_order);
            auto lu = frames[g.idx(i, j)].partialPivLu();
            out.mu[g.idx(i, j)] = lu.solve(dau);
            out.mv[g.idx(i, j)] = lu.solve(dav);
        }
    });
    return out;
}

} // namespace

// ---------------------------------------------------------------------------

double EuclideanSurfaceGrid::offdiagonal_residual() const {
    const GridShape& g = shape;
    double worst = 0.0;
    double scale = 0.0;
    for (int i = 1; i + 1 < g.nu; ++i)
        for (int j = 1; j + 1 < g.nv; ++j) {
            Vec3 fuv = (f[g.idx(i + 1, j + 1)] - f[g.idx(i + 1, j - 1)] - f[g.idx(i - 1, j + 1)] +
                        f[g.idx(i - 1, j - 1)]) /
                       (4.0 * g.du * g.dv);
            Vec3 fuu = (f[g.idx(i + 1, j)] - 2.0 * f[g.idx(i, j)] + f[g.idx(i - 1, j)]) /
                       (g.du * g.du);
            Vec3 fvv = (f[g.idx(i, j + 1)] - 2.0 * f[g.idx(i, j)] + f[g.idx(i, j - 1)]) /
                       (g.dv * g.dv);
            const Vec3& nn = n[g.idx(i, j)];
            worst = std::max(worst, std::abs(fuv.dot(nn)));
            scale = std::max({scale, std::abs(fuu.dot(nn)), std::abs(fvv.dot(nn))});
        }
    return scale > 0 ? worst / scale : worst;
}

LegendreSurfaceGrid lift_euclidean(const EuclideanSurfaceGrid& g, double tol) {
    for (const Vec3& nn : g.n)
        if (std::abs(nn.norm() - 1.0) > 1e-6) throw NonUnitNormal("grid normal not unit");
    if (g.shape.nu >= 3 && g.shape.nv >= 3) {
        double off = g.offdiagonal_residual();
        if (off > tol)
            throw NotCurvatureLineCoordinates("off-diagonal second-fundamental residual " +
                                              std::to_string(off));
    }

    LegendreSurfaceGrid out;
    out.shape = g.shape;
    const int count = g.shape.count();
    out.phi0.resize(count);
    out.phi1.resize(count);
    for (int k = 0; k < count; ++k) {
        out.phi0[k] = lift_point_sphere(g.f[k]);
        out.phi1[k] = lift_tangent_plane(g.f[k], g.n[k]);
    }
    if (g.has_partials) {
        out.has_partials = true;
        out.phi0_u.resize(count);
        out.phi0_v.resize(count);
        out.phi1_u.resize(count);
        out.phi1_v.resize(count);
        auto d0 = [](const Vec3& f, const Vec3& df) {
            Vec6 v;
            v << 0.0, df[0] / kSqrt2, df[1], df[2], -df[0] / kSqrt2, f.dot(df);
            return v;
        };
        auto d1 = [](const Vec3& f, const Vec3& n, const Vec3& df, const Vec3& dn) {
            Vec6 v;
            v << 0.0, dn[0] / 2.0, dn[1] / kSqrt2, dn[2] / kSqrt2, -dn[0] / 2.0,
                (dn.dot(f) + n.dot(df)) / kSqrt2;
            return v;
        };
        for (int k = 0; k < count; ++k) {
            out.phi0_u[k] = d0(g.f[k], g.fu[k]);
            out.phi0_v[k] = d0(g.f[k], g.fv[k]);
            out.phi1_u[k] = d1(g.f[k], g.n[k], g.fu[k], g.n_u[k]);
            out.phi1_v[k] = d1(g.f[k], g.n[k], g.fv[k], g.n_v[k]);
        }
    }
    return out;
}

Vec6 LegendreSurfaceGrid::d_phi(int which, int dir, int i, int j) const {
    if (has_partials) {
        int k = shape.idx(i, j);
        if (which == 0) return dir == 0 ? phi0_u[k] : phi0_v[k];
        return dir == 0 ? phi1_u[k] : phi1_v[k];
    }
    const auto& field = which == 0 ? phi0 : phi1;
    auto get = [&](int ii, int jj) -> const Vec6& { return field[shape.idx(ii, jj)]; };
    if (dir == 0) return apply_stencil_u<Vec6>(get, i, j, shape.nu, shape.du, 2);
    return apply_stencil_v<Vec6>(get, i, j, shape.nv, shape.dv, 2);
}

LegendreSurfaceGrid::Residuals LegendreSurfaceGrid::residuals() const {
    Residuals r;
    const GridShape& g = shape;
    double scale2 = 0.0;
    for (int k = 0; k < g.count(); ++k)
        scale2 = std::max({scale2, phi0[k].squaredNorm(), phi1[k].squaredNorm()});
    r.stalk_min = 1e300;
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            int k = g.idx(i, j);
            r.isotropy = std::max({r.isotropy, std::abs(inner(phi0[k], phi0[k])) / scale2,
                                   std::abs(inner(phi1[k], phi1[k])) / scale2,
                                   std::abs(inner(phi0[k], phi1[k])) / scale2});
            Vec6 p0u = d_phi(0, 0, i, j), p0v = d_phi(0, 1, i, j);
            Vec6 p1u = d_phi(1, 0, i, j), p1v = d_phi(1, 1, i, j);
            double dscale = std::max({p0u.norm() * phi1[k].norm(), p0v.norm() * phi1[k].norm(),
                                      1e-300});
            r.legendre = std::max({r.legendre, std::abs(inner(p0u, phi1[k])) / dscale,
                                   std::abs(inner(p0v, phi1[k])) / dscale});

            double quu0 = inner(p0u, p0u), qvv0 = inner(p0v, p0v);
            double quu1 = inner(p1u, p1u), qvv1 = inner(p1v, p1v);
            double fscale = std::max({quu0, qvv0, quu1, qvv1, 1e-300});
            double mixed = std::max({std::abs(inner(p0u, p0v)), std::abs(inner(p1u, p1v)),
                                     0.5 * std::abs(inner(p0u, p1v) + inner(p0v, p1u))});
            r.cross_offdiag = std::max(r.cross_offdiag, mixed / fscale);
            double det = std::abs(quu0 * qvv1 - quu1 * qvv0) / (fscale * fscale);
            r.stalk_min = std::min(r.stalk_min, det);
        }
    return r;
}

void LegendreSurfaceGrid::validate(double tol) const {
    auto r = residuals();
    if (r.isotropy > tol)
        throw NotCurvatureLineCoordinates("isotropy residual " + std::to_string(r.isotropy));
    if (r.legendre > tol)
        throw NotCurvatureLineCoordinates("Legendre residual " + std::to_string(r.legendre));
    if (r.cross_offdiag > tol)
        throw NotCurvatureLineCoordinates("mixed-form residual " + std::to_string(r.cross_offdiag));
}

// ---------------------------------------------------------------------------
// Frame reduction

ReductionResult reduce_to_normal_frame(const LegendreSurfaceGrid& s, const ReductionOptions& opts) {
    const GridShape& g = s.shape;
    const int count = g.count();
    if (g.nu < 5 || g.nv < 5) throw InsufficientOrder("need at least a 5x5 grid");

    // Stage 1: curvature-sphere splitting and first-order frames.
    std::vector<Eigen::Vector2d> root0(count), root1(count);
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            int k = g.idx(i, j);
            Vec6 p0u = s.d_phi(0, 0, i, j), p0v = s.d_phi(0, 1, i, j);
            Vec6 p1u = s.d_phi(1, 0, i, j), p1v = s.d_phi(1, 1, i, j);

            double qu00 = inner(p0u, p0u), qu01 = inner(p0u, p1u), qu11 = inner(p1u, p1u);
            double qv00 = inner(p0v, p0v), qv01 = inner(p0v, p1v), qv11 = inner(p1v, p1v);
            double fscale = std::max({qu00, qu11, qv00, qv11, 1e-300});

            if (std::abs(qu00 * qv11 - qu11 * qv00) <= opts.stalk_tol * fscale * fscale)
                throw StalkCollapse("quadratic-form sheaf is 1-dimensional at node (" +
                                    std::to_string(i) + "," + std::to_string(j) + ")");

            // sigma_0 kills the v-direction, sigma_1 the u-direction
            root0[k] = psd_root(qv00, qv01, qv11);
            root1[k] = psd_root(qu00, qu01, qu11);
            if (std::abs(root0[k][0] * root1[k][1] - root0[k][1] * root1[k][0]) <= opts.stalk_tol)
                throw StalkCollapse("curvature spheres coincide at node (" + std::to_string(i) +
                                    "," + std::to_string(j) + ")");
        }

    // Sign continuity sweep from the anchor.
    const int ai = g.nu / 2, aj = g.nv / 2;
    auto align = [&](std::vector<Eigen::Vector2d>& field, int k, int kref) {
        if (field[k].dot(field[kref]) < 0.0) field[k] = -field[k];
    };
    auto sweep = [&](std::vector<Eigen::Vector2d>& field) {
        for (int j = aj + 1; j < g.nv; ++j) align(field, g.idx(ai, j), g.idx(ai, j - 1));
        for (int j = aj - 1; j >= 0; --j) align(field, g.idx(ai, j), g.idx(ai, j + 1));
        for (int i = ai + 1; i < g.nu; ++i)
            for (int j = 0; j < g.nv; ++j) align(field, g.idx(i, j), g.idx(i - 1, j));
        for (int i = ai - 1; i >= 0; --i)
            for (int j = 0; j < g.nv; ++j) align(field, g.idx(i, j), g.idx(i + 1, j));
    };
    sweep(root0);
    sweep(root1);

    std::vector<Mat6> frames(count);
    parallel_for(0, g.nu, [&](int i) {
        for (int j = 0; j < g.nv; ++j) {
            int k = g.idx(i, j);
            Vec6 a0 = root0[k][0] * s.phi0[k] + root0[k][1] * s.phi1[k];
            Vec6 a1 = root1[k][0] * s.phi0[k] + root1[k][1] * s.phi1[k];
            a0 /= a0.norm();
            a1 /= a1.norm();
            // images of the curvature-sphere differentials span (A3, A2)
            Vec6 w3 = root0[k][0] * s.d_phi(0, 0, i, j) + root0[k][1] * s.d_phi(1, 0, i, j);
            Vec6 w2 = root1[k][0] * s.d_phi(0, 1, i, j) + root1[k][1] * s.d_phi(1, 1, i, j);
            frames[k] = complete_frame(a0, a1, w2, w3);
        }
    });

    auto recompute = [&]() { return frame_maurer_cartan(g, frames, opts.fd_order); };

    // Orientation gauge at the anchor: a > 0, and ab > 0 is intrinsic.
    {
        McField mc = recompute();
        double a_anchor = mc.mu[g.idx(ai, aj)](3, 0);
        double b_anchor = mc.mv[g.idx(ai, aj)](2, 1);
        if (a_anchor < 0.0) {
            for (Mat6& f : frames) {
                f.col(2) = -f.col(2);
                f.col(3) = -f.col(3);
            }
            a_anchor = -a_anchor;
            b_anchor = -b_anchor;
        }
        if (!(b_anchor > 0.0))
            throw DegenerateSurface(
                "orientation alpha^1 ^ alpha^2 is negative; swap the roles of u and v");
    }

    ReductionState state;
    state.y21.resize(count);
    state.y12.resize(count);
    state.b3.resize(count);
    state.r4.resize(count);
    state.s4.resize(count);
    state.p5.resize(count);
    state.q5.resize(count);

    // Stage 2: kill the alpha^1-part of alpha^1_0 and alpha^2-part of alpha^0_1.
    {
        McField mc = recompute();
        for (int k = 0; k < count; ++k) {
            double a = mc.mu[k](3, 0), b = mc.mv[k](2, 1);
            state.y21[k] = mc.mu[k](1, 0) / a;
            state.y12[k] = -mc.mv[k](0, 1) / b;
            frames[k] = frames[k] * g0_block(Eigen::Matrix2d::Identity(),
                                             Eigen::Matrix2d::Identity(),
                                             offdiag(state.y12[k], state.y21[k]), 0.0);
        }
    }

    // Stage 3: kill P^0_22 (= -P^1_31) with the b-parameter.
    {
        McField mc = recompute();
        for (int k = 0; k < count; ++k) {
            double b = mc.mv[k](2, 1);
            state.b3[k] = mc.mv[k](0, 2) / b;
            frames[k] = frames[k] * g0_block(Eigen::Matrix2d::Identity(),
                                             Eigen::Matrix2d::Identity(),
                                             Eigen::Matrix2d::Zero(), state.b3[k]);
        }
    }

    // Stage 4: scale so alpha^0_1 = alpha^1 and alpha^1_0 = alpha^2.
    {
        McField mc = recompute();
        double scale = 0.0;
        for (int k = 0; k < count; ++k) {
            double a = mc.mu[k](3, 0), b = mc.mv[k](2, 1);
            scale = std::max({scale, std::abs(mc.mu[k](0, 1) / a), std::abs(mc.mv[k](1, 0) / b)});
        }
        for (int k = 0; k < count; ++k) {
            double a = mc.mu[k](3, 0), b = mc.mv[k](2, 1);
            double p011 = mc.mu[k](0, 1) / a;
            double p102 = mc.mv[k](1, 0) / b;
            if (std::abs(p011) <= opts.degeneracy_tol * scale ||
                std::abs(p102) <= opts.degeneracy_tol * scale)
                throw DegenerateSurface("curvature sphere map is not an immersion (P^1_02 or "
                                        "P^0_11 vanishes)");
            if (p011 * p102 <= 0.0)
                throw DegenerateSurface("fourth-order scaling impossible: P^0_11 P^1_02 < 0");
            double r = std::cbrt(p011 * p011 * p102);
            double sgauge = r * r / p011;
            state.r4[k] = r;
            state.s4[k] = sgauge;
            Eigen::Matrix2d d = Eigen::Matrix2d::Zero();
            d(0, 0) = r;
            d(1, 1) = sgauge;
            frames[k] = frames[k] * g0_block(d, Eigen::Matrix2d::Identity(),
                                             Eigen::Matrix2d::Zero(), 0.0);
        }
    }

    // Stage 5: kill alpha^0_2 and alpha^1_3 with the diagonal Y-parameters.
    {
        McField mc = recompute();
        for (int k = 0; k < count; ++k) {
            double a = mc.mu[k](3, 0), b = mc.mv[k](2, 1);
            state.p5[k] = -mc.mu[k](0, 2) / a;
            state.q5[k] = -mc.mv[k](1, 3) / b;
            Eigen::Matrix2d y = Eigen::Matrix2d::Zero();
            y(0, 0) = state.p5[k];
            y(1, 1) = state.q5[k];
            frames[k] = frames[k] * g0_block(Eigen::Matrix2d::Identity(),
                                             Eigen::Matrix2d::Identity(), y, 0.0);
        }
    }

    // Final coframe and Pfaffian report.
    ReductionResult out;
    out.frame.shape = g;
    out.frame.order = 5;
    out.frame.frames = std::move(frames);
    out.frame.state = std::move(state);
    out.coframe.shape = g;
    out.coframe.a.resize(count);
    out.coframe.b.resize(count);

    McField mc = frame_maurer_cartan(g, out.frame.frames, opts.fd_order);
    double cscale = 0.0;
    for (int k = 0; k < count; ++k) {
        out.coframe.a[k] = mc.mu[k](3, 0);
        out.coframe.b[k] = mc.mv[k](2, 1);
        cscale = std::max({cscale, std::abs(out.coframe.a[k]), std::abs(out.coframe.b[k])});
    }
    PfaffianReport& rep = out.report;
    for (int k = 0; k < count; ++k) {
        const Mat6& mu = mc.mu[k];
        const Mat6& mv = mc.mv[k];
        auto both = [&](int i, int j) { return std::max(std::abs(mu(i, j)), std::abs(mv(i, j))); };
        rep.per_equation[0] = std::max(rep.per_equation[0], both(4, 0));
        rep.per_equation[1] = std::max(rep.per_equation[1], both(2, 0));
        rep.per_equation[2] = std::max(rep.per_equation[2], both(3, 1));
        rep.per_equation[3] = std::max(rep.per_equation[3], both(3, 2));
        rep.per_equation[4] =
            std::max({rep.per_equation[4], std::abs(mu(1, 0) - mu(2, 1)),
                      std::abs(mv(1, 0) - mv(2, 1))});
        rep.per_equation[5] =
            std::max({rep.per_equation[5], std::abs(mu(0, 1) - mu(3, 0)),
                      std::abs(mv(0, 1) - mv(3, 0))});
        rep.per_equation[6] = std::max(rep.per_equation[6], both(0, 2));
        rep.per_equation[7] = std::max(rep.per_equation[7], both(1, 3));
        if (out.coframe.a[k] * out.coframe.b[k] <= 0.0) rep.orientation_ok = false;
    }
    for (double& e : rep.per_equation) e /= std::max(cscale, 1e-300);
    rep.max_residual = *std::max_element(rep.per_equation.begin(), rep.per_equation.end());
    return out;
}

// ---------------------------------------------------------------------------

InvariantField extract_invariants(const FrameField& frame, const Coframe& cof,
                                  const ReductionOptions& opts) {
    if (frame.order != 5) throw IllConditionedCoframe("frame is not of order 5");
    const GridShape& g = frame.shape;
    const int count = g.count();
    double cscale = 0.0;
    for (int k = 0; k < count; ++k)
        cscale = std::max({cscale, std::abs(cof.a[k]), std::abs(cof.b[k])});
    for (int k = 0; k < count; ++k)
        if (std::abs(cof.a[k]) < 1e-12 * cscale || std::abs(cof.b[k]) < 1e-12 * cscale)
            throw IllConditionedCoframe("coframe coefficient vanishes at node " +
                                        std::to_string(k));

    McField mc = frame_maurer_cartan(g, frame.frames, opts.fd_order);

    InvariantField out;
    out.shape = g;
    out.q1.resize(count);
    out.q2.resize(count);
    out.p1.resize(count);
    out.p2.resize(count);
    out.r1.resize(count);
    out.r2.resize(count);
    double lsq = 0.0, a04 = 0.0;
    for (int k = 0; k < count; ++k) {
        const Mat6& mu = mc.mu[k];
        const Mat6& mv = mc.mv[k];
        double a = cof.a[k], b = cof.b[k];
        double q1 = -(2.0 * mu(0, 0) + mu(1, 1)) / (5.0 * a);
        double q2 = (mv(0, 0) + 2.0 * mv(1, 1)) / (5.0 * b);
        double p1 = mu(1, 2) / a;
        double p2 = mv(0, 3) / b;
        double r1 = (a * mu(0, 3) + b * mv(0, 4)) / (a * a + b * b);
        double r2 = (b * mv(1, 2) - a * mu(0, 4)) / (a * a + b * b);
        out.q1[k] = q1;
        out.q2[k] = q2;
        out.p1[k] = p1;
        out.p2[k] = p2;
        out.r1[k] = r1;
        out.r2[k] = r2;
        double res = std::max({std::abs(mu(0, 0) + 2.0 * q1 * a), std::abs(mv(0, 0) - q2 * b),
                               std::abs(mu(1, 1) + q1 * a), std::abs(mv(1, 1) - 2.0 * q2 * b),
                               std::abs(mu(0, 3) - r1 * a), std::abs(mv(0, 3) - p2 * b),
                               std::abs(mu(1, 2) - p1 * a), std::abs(mv(1, 2) - r2 * b)});
        double res04 = std::max(std::abs(mu(0, 4) + r2 * a), std::abs(mv(0, 4) - r1 * b));
        lsq = std::max(lsq, res / cscale);
        a04 = std::max(a04, res04 / cscale);
    }
    out.lsq_residual = lsq;
    out.alpha04_residual = a04;
    return out;
}

Coframe blaschke_coframe_closed_form(const EuclideanSurfaceGrid& g, double tol) {
    const GridShape& sh = g.shape;
    const int count = sh.count();
    Coframe out;
    out.shape = sh;
    out.a.resize(count);
    out.b.resize(count);

    std::vector<double> k1, k2, g11, g22, dk1, dk2;
    if (g.has_curvatures) {
        k1 = g.k1;
        k2 = g.k2;
        g11 = g.g11;
        g22 = g.g22;
        dk1 = g.dk1_du;
        dk2 = g.dk2_dv;
    } else {
        // finite-difference curvature package from positions and normals
        k1.resize(count);
        k2.resize(count);
        g11.resize(count);
        g22.resize(count);
        dk1.resize(count);
        dk2.resize(count);
        auto getf = [&](int i, int j) -> const Vec3& { return g.f[sh.idx(i, j)]; };
        for (int i = 0; i < sh.nu; ++i)
            for (int j = 0; j < sh.nv; ++j) {
                int k = sh.idx(i, j);
                Vec3 fu = apply_stencil_u<Vec3>(getf, i, j, sh.nu, sh.du, 2);
                Vec3 fv = apply_stencil_v<Vec3>(getf, i, j, sh.nv, sh.dv, 2);
                auto getn = [&](int ii, int jj) -> const Vec3& { return g.n[sh.idx(ii, jj)]; };
                Vec3 nu_ = apply_stencil_u<Vec3>(getn, i, j, sh.nu, sh.du, 2);
                Vec3 nv_ = apply_stencil_v<Vec3>(getn, i, j, sh.nv, sh.dv, 2);
                g11[k] = fu.dot(fu);
                g22[k] = fv.dot(fv);
                // Weingarten in curvature-line coordinates: dn = -k df
                k1[k] = -nu_.dot(fu) / g11[k];
                k2[k] = -nv_.dot(fv) / g22[k];
            }
        for (int i = 0; i < sh.nu; ++i)
            for (int j = 0; j < sh.nv; ++j) {
                int k = sh.idx(i, j);
                auto getk1 = [&](int ii, int jj) { return k1[sh.idx(ii, jj)]; };
                auto getk2 = [&](int ii, int jj) { return k2[sh.idx(ii, jj)]; };
                dk1[k] = apply_stencil_u<double>(getk1, i, j, sh.nu, sh.du, 2);
                dk2[k] = apply_stencil_v<double>(getk2, i, j, sh.nv, sh.dv, 2);
            }
    }

    double kscale = 0.0, dscale = 0.0;
    for (int k = 0; k < count; ++k) {
        kscale = std::max({kscale, std::abs(k1[k]), std::abs(k2[k])});
        dscale = std::max({dscale, std::abs(dk1[k]), std::abs(dk2[k])});
    }
    for (int k = 0; k < count; ++k) {
        if (std::abs(k1[k] - k2[k]) <= tol * kscale)
            throw UmbilicPoint("k1 = k2 at node " + std::to_string(k));
        if (std::abs(dk1[k]) <= tol * std::max(dscale, 1.0) ||
            std::abs(dk2[k]) <= tol * std::max(dscale, 1.0))
            throw DegenerateSurface("principal curvature derivative vanishes at node " +
                                    std::to_string(k));
        double dk = k1[k] - k2[k];
        out.a[k] = std::cbrt(std::sqrt(g11[k] / g22[k]) * dk1[k] * dk1[k] * dk2[k]) / dk;
        out.b[k] = -std::cbrt(std::sqrt(g22[k] / g11[k]) * dk1[k] * dk2[k] * dk2[k]) / dk;
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {
struct InvDerivs {
    double dq1_dv, dq2_du, dr1_du, dr1_dv, dr2_du, dr2_dv, dp1_dv, dp2_du;
};

InvDerivs inv_derivs_at(const InvariantField& f, int i, int j) {
    const GridShape& g = f.shape;
    InvDerivs d;
    if (f.has_derivs) {
        int k = g.idx(i, j);
        d.dq1_dv = f.dq1_dv[k];
        d.dq2_du = f.dq2_du[k];
        d.dr1_du = f.dr1_du[k];
        d.dr1_dv = f.dr1_dv[k];
        d.dr2_du = f.dr2_du[k];
        d.dr2_dv = f.dr2_dv[k];
        d.dp1_dv = f.dp1_dv[k];
        d.dp2_du = f.dp2_du[k];
        return d;
    }
    auto du = [&](const std::vector<double>& x) {
        auto get = [&](int ii, int jj) { return x[g.idx(ii, jj)]; };
        return apply_stencil_u<double>(get, i, j, g.nu, g.du, 2);
    };
    auto dv = [&](const std::vector<double>& x) {
        auto get = [&](int ii, int jj) { return x[g.idx(ii, jj)]; };
        return apply_stencil_v<double>(get, i, j, g.nv, g.dv, 2);
    };
    d.dq1_dv = dv(f.q1);
    d.dq2_du = du(f.q2);
    d.dr1_du = du(f.r1);
    d.dr1_dv = dv(f.r1);
    d.dr2_du = du(f.r2);
    d.dr2_dv = dv(f.r2);
    d.dp1_dv = dv(f.p1);
    d.dp2_du = du(f.p2);
    return d;
}
} // namespace

StructureResiduals structure_residuals(const InvariantField& inv, const Coframe& cof) {
    const GridShape& g = inv.shape;
    StructureResiduals out;
    std::array<double, 7> sumsq{};
    int used = 0;
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            int k = g.idx(i, j);
            double a = cof.a[k], b = cof.b[k], ab = a * b;
            auto geta = [&](int ii, int jj) { return cof.a[g.idx(ii, jj)]; };
            auto getb = [&](int ii, int jj) { return cof.b[g.idx(ii, jj)]; };
            double da_dv = apply_stencil_v<double>(geta, i, j, g.nv, g.dv, 2);
            double db_du = apply_stencil_u<double>(getb, i, j, g.nu, g.du, 2);
            InvDerivs d = inv_derivs_at(inv, i, j);

            std::array<double, 7> e;
            e[0] = -da_dv + inv.q2[k] * ab;
            e[1] = db_du + inv.q1[k] * ab;
            e[2] = 2.0 * a * d.dq1_dv + b * d.dq2_du - (inv.p2[k] - inv.q1[k] * inv.q2[k] - 1.0) * ab;
            e[3] = a * d.dq1_dv + 2.0 * b * d.dq2_du -
                   (-inv.p1[k] + inv.q1[k] * inv.q2[k] + 1.0) * ab;
            e[4] = -a * d.dr1_dv + b * d.dp2_du -
                   (2.0 * inv.q2[k] * inv.r1[k] + 3.0 * inv.q1[k] * inv.p2[k]) * ab;
            e[5] = -a * d.dp1_dv + b * d.dr2_du -
                   (2.0 * inv.q1[k] * inv.r2[k] + 3.0 * inv.q2[k] * inv.p1[k]) * ab;
            e[6] = a * d.dr2_dv + b * d.dr1_du -
                   4.0 * (inv.q1[k] * inv.r1[k] - inv.q2[k] * inv.r2[k]) * ab;
            for (int q = 0; q < 7; ++q) {
                out.max_norm[q] = std::max(out.max_norm[q], std::abs(e[q]));
                sumsq[q] += e[q] * e[q];
            }
            ++used;
        }
    for (int q = 0; q < 7; ++q) out.l2_norm[q] = std::sqrt(sumsq[q] / std::max(used, 1));
    return out;
}

ElResiduals el_residuals(const InvariantField& inv, const Coframe& cof, double tol) {
    const GridShape& g = inv.shape;
    ElResiduals out;
    out.shape = g;
    out.r1_residual.resize(g.count());
    out.r2_residual.resize(g.count());
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            int k = g.idx(i, j);
            InvDerivs d = inv_derivs_at(inv, i, j);
            double R1 = d.dr1_du / cof.a[k] - 4.0 * inv.q1[k] * inv.r1[k];
            double R2 = -d.dr2_dv / cof.b[k] - 4.0 * inv.q2[k] * inv.r2[k];
            out.r1_residual[k] = R1;
            out.r2_residual[k] = R2;
            out.max1 = std::max(out.max1, std::abs(R1));
            out.max2 = std::max(out.max2, std::abs(R2));
        }
    out.is_minimal = std::max(out.max1, out.max2) <= tol;
    return out;
}

double lie_area(const Coframe& cof) {
    const GridShape& g = cof.shape;
    double acc = 0.0;
    for (int i = 0; i + 1 < g.nu; ++i)
        for (int j = 0; j + 1 < g.nv; ++j) {
            double cell = cof.a[g.idx(i, j)] * cof.b[g.idx(i, j)] +
                          cof.a[g.idx(i + 1, j)] * cof.b[g.idx(i + 1, j)] +
                          cof.a[g.idx(i, j + 1)] * cof.b[g.idx(i, j + 1)] +
                          cof.a[g.idx(i + 1, j + 1)] * cof.b[g.idx(i + 1, j + 1)];
            acc += 0.25 * cell * g.du * g.dv;
        }
    return acc;
}

GaussMapResult gauss_map(const FrameField& frame, const Coframe& cof,
                         const ReductionOptions& opts) {
    const GridShape& g = frame.shape;
    GaussMapResult out;
    out.planes.resize(g.count());
    for (int k = 0; k < g.count(); ++k) {
        const Mat6& a = frame.frames[k];
        out.planes[k] = DupinElement{{a.col(0), a.col(3), a.col(5)}};
        if (!out.planes[k].valid(1e-7))
            throw SignatureFailure("Gauss-map plane is not of signature (2,1) at node " +
                                   std::to_string(k));
    }
    McField mc = frame_maurer_cartan(g, frame.frames, opts.fd_order);
    double dev = 0.0, scale = 0.0;
    for (int k = 0; k < g.count(); ++k) {
        LieAlgebraElement wu{mc.mu[k]}, wv{mc.mv[k]};
        double ab = cof.a[k] * cof.b[k];
        dev = std::max({dev, std::abs(dupin_metric_eval(wu)), std::abs(dupin_metric_eval(wv)),
                        std::abs(dupin_metric_eval(wu, wv) - 0.5 * ab)});
        scale = std::max(scale, std::abs(ab));
    }
    out.isometry_deviation = dev / std::max(scale, 1e-300);
    return out;
}

ShapeData shape_and_mean_curvature(const InvariantField& inv, const Coframe& cof) {
    const GridShape& g = inv.shape;
    ShapeData out;
    out.shape = g;
    out.s1_b3.resize(g.count());
    out.s2_b3.resize(g.count());
    out.mean_curvature.resize(g.count());
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            int k = g.idx(i, j);
            InvDerivs d = inv_derivs_at(inv, i, j);
            double a = cof.a[k], b = cof.b[k];
            double dr2_x1 = d.dr2_du / a, dr2_x2 = d.dr2_dv / b;
            double dr1_x1 = d.dr1_du / a, dr1_x2 = d.dr1_dv / b;
            out.s1_b3[k] = {-(dr2_x1 - 2.0 * inv.r2[k] * inv.q1[k]),
                            -(dr2_x2 + 4.0 * inv.r2[k] * inv.q2[k])};
            out.s2_b3[k] = {dr1_x1 - 4.0 * inv.r1[k] * inv.q1[k],
                            dr1_x2 + 2.0 * inv.r1[k] * inv.q2[k]};
            out.mean_curvature[k] = -dr2_x2 - 4.0 * inv.r2[k] * inv.q2[k] + dr1_x1 -
                                    4.0 * inv.r1[k] * inv.q1[k];
        }
    return out;
}

// ---------------------------------------------------------------------------
// Analytic charts

namespace {

Series2 linear_jet(int order, double c, double cu, double cv) {
    Series2 s(order, c);
    if (order >= 1) {
        s.set(1, 0, cu);
        s.set(0, 1, cv);
    }
    return s;
}

// cos/sin of (theta0 + u) or (theta0 + v) as jets
Series2 trig_jet(double theta0, bool along_u, int order, bool want_sin) {
    Series2 s(order);
    double fact = 1.0;
    for (int k = 0; k <= order; ++k) {
        if (k > 0) fact *= k;
        double val = want_sin ? std::sin(theta0 + k * M_PI / 2.0)
                              : std::cos(theta0 + k * M_PI / 2.0);
        if (along_u)
            s.set(k, 0, val / fact);
        else
            s.set(0, k, val / fact);
    }
    return s;
}

std::array<Series2, 3> cross_jet(const std::array<Series2, 3>& x,
                                 const std::array<Series2, 3>& y) {
    return {x[1] * y[2] - x[2] * y[1], x[2] * y[0] - x[0] * y[2], x[0] * y[1] - x[1] * y[0]};
}

Series2 dot_jet(const std::array<Series2, 3>& x, const std::array<Series2, 3>& y) {
    return x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
}

} // namespace

ChartJet ellipsoid_chart(double a, double b, double c) {
    double a2 = a * a, b2 = b * b, c2 = c * c;
    return [=](double u, double v, int order) -> std::array<Series2, 3> {
        Series2 l1 = linear_jet(order, u, 1.0, 0.0);
        Series2 l2 = linear_jet(order, v, 0.0, 1.0);
        Series2 xa = ((Series2(order, a2) - l1) * (Series2(order, a2) - l2)) *
                     (a2 / ((a2 - b2) * (a2 - c2)));
        Series2 ya = ((Series2(order, b2) - l1) * (l2 - Series2(order, b2))) *
                     (b2 / ((a2 - b2) * (b2 - c2)));
        Series2 za = ((l1 - Series2(order, c2)) * (l2 - Series2(order, c2))) *
                     (c2 / ((a2 - c2) * (b2 - c2)));
        return {xa.sqrt(), ya.sqrt(), za.sqrt()};
    };
}

ChartJet torus_chart(double R, double r) {
    return [=](double u, double v, int order) -> std::array<Series2, 3> {
        Series2 cu = trig_jet(u, true, order, false);
        Series2 su = trig_jet(u, true, order, true);
        Series2 cv = trig_jet(v, false, order, false);
        Series2 sv = trig_jet(v, false, order, true);
        Series2 rad = Series2(order, R) + r * cu;
        return {rad * cv, rad * sv, r * su};
    };
}

ChartJet sphere_chart(double R) {
    return [=](double u, double v, int order) -> std::array<Series2, 3> {
        Series2 cu = trig_jet(u, true, order, false);
        Series2 su = trig_jet(u, true, order, true);
        Series2 cv = trig_jet(v, false, order, false);
        Series2 sv = trig_jet(v, false, order, true);
        return {R * su * cv, R * su * sv, R * cu};
    };
}

EuclideanSurfaceGrid sample_chart(const ChartJet& chart, const GridShape& shape) {
    EuclideanSurfaceGrid g;
    g.shape = shape;
    const int count = shape.count();
    g.f.resize(count);
    g.n.resize(count);
    g.fu.resize(count);
    g.fv.resize(count);
    g.n_u.resize(count);
    g.n_v.resize(count);
    g.k1.resize(count);
    g.k2.resize(count);
    g.g11.resize(count);
    g.g22.resize(count);
    g.dk1_du.resize(count);
    g.dk2_dv.resize(count);
    g.has_partials = true;
    g.has_curvatures = true;

    const int order = 4;
    parallel_for(0, shape.nu, [&](int i) {
        for (int j = 0; j < shape.nv; ++j) {
            int k = shape.idx(i, j);
            auto f = chart(shape.u(i), shape.v(j), order);
            std::array<Series2, 3> fu = {f[0].du(), f[1].du(), f[2].du()};
            std::array<Series2, 3> fv = {f[0].dv(), f[1].dv(), f[2].dv()};
            auto raw_n = cross_jet(fu, fv);
            Series2 nn = dot_jet(raw_n, raw_n);
            Series2 inv_norm = nn.sqrt().inverse();
            std::array<Series2, 3> n = {raw_n[0] * inv_norm, raw_n[1] * inv_norm,
                                        raw_n[2] * inv_norm};

            for (int cmp = 0; cmp < 3; ++cmp) {
                g.f[k][cmp] = f[cmp].get(0, 0);
                g.fu[k][cmp] = fu[cmp].get(0, 0);
                g.fv[k][cmp] = fv[cmp].get(0, 0);
                g.n[k][cmp] = n[cmp].get(0, 0);
                g.n_u[k][cmp] = n[cmp].get(1, 0);
                g.n_v[k][cmp] = n[cmp].get(0, 1);
            }

            std::array<Series2, 3> fuu = {fu[0].du(), fu[1].du(), fu[2].du()};
            std::array<Series2, 3> fvv = {fv[0].dv(), fv[1].dv(), fv[2].dv()};
            Series2 g11 = dot_jet(fu, fu);
            Series2 g22 = dot_jet(fv, fv);
            Series2 k1 = dot_jet(fuu, n) * g11.inverse();
            Series2 k2 = dot_jet(fvv, n) * g22.inverse();
            g.g11[k] = g11.get(0, 0);
            g.g22[k] = g22.get(0, 0);
            g.k1[k] = k1.get(0, 0);
            g.k2[k] = k2.get(0, 0);
            g.dk1_du[k] = k1.get(1, 0);
            g.dk2_dv[k] = k2.get(0, 1);
        }
    });
    return g;
}

LegendreSurfaceGrid transform_grid(const LieGroupElement& g, const LegendreSurfaceGrid& s) {
    LegendreSurfaceGrid out = s;
    for (auto* field : {&out.phi0, &out.phi1, &out.phi0_u, &out.phi0_v, &out.phi1_u, &out.phi1_v})
        for (Vec6& v : *field) v = g.m * v;
    return out;
}

std::vector<Vec3> euclidean_projection(const LegendreSurfaceGrid& s, double tol) {
    Vec6 e = basis_vector(1) + basis_vector(4);
    std::vector<Vec3> out(s.shape.count());
    for (int k = 0; k < s.shape.count(); ++k) {
        double c0 = inner(s.phi0[k], e);
        double c1 = inner(s.phi1[k], e);
        Vec6 rep = c1 * s.phi0[k] - c0 * s.phi1[k];
        auto decoded = quadric_to_sphere(QuadricPoint{rep}, tol * 1e3);
        if (std::holds_alternative<PointSphere>(decoded))
            out[k] = std::get<PointSphere>(decoded).point;
        else if (std::holds_alternative<Sphere>(decoded))
            out[k] = std::get<Sphere>(decoded).center;
        else
            throw NondecodableQuadricPoint("contact element passes through infinity at node " +
                                           std::to_string(k));
    }
    return out;
}

} // namespace liegeo
