#include "relp/cone_program.hpp"

#include "relp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace relp {

void ConeProgram::add_linear(std::vector<std::pair<int, double>> entries, double rhs) {
    linear_rows.push_back(SparseRow{std::move(entries)});
    const Eigen::Index l = linear_h.size();
    linear_h.conservativeResize(l + 1);
    linear_h(l) = rhs;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt_sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3e", v);
    return buf;
}

// Nesterov-Todd scaling for R_+^l x Q^q. W is symmetric; W z = W^-1 s = lambda.
// The cone block uses W = beta * [w0, w1^T; w1, I + w1 w1^T / (1 + w0)] with
// w^T J w = 1, and W^-1 = (1/beta) * J Wbar J.
struct Scaling {
    Eigen::VectorXd d;       // linear block: sqrt(s/z)
    double beta = 1.0;       // cone block
    Eigen::VectorXd wbar;    // cone block, size q
    Eigen::VectorXd lambda;  // scaled point, size l + q
};

double jnorm(const Eigen::Ref<const Eigen::VectorXd>& v) {
    const double tail = v.tail(v.size() - 1).norm();
    const double a = v(0) - tail;
    const double b = v(0) + tail;
    return std::sqrt(std::max(a, 0.0) * std::max(b, 0.0));
}

class Kkt {
public:
    Kkt(const ConeProgram& p) : p_(p), l_(static_cast<Eigen::Index>(p.linear_rows.size())) {
        q_ = p.soc ? p.soc->h.size() : 0;
        if (p.soc) {
            for (int j = 0; j < p.n; ++j) {
                if (p.soc->G.col(j).cwiseAbs().maxCoeff() > 0.0) soc_cols_.push_back(j);
            }
            g_active_.resize(q_, static_cast<Eigen::Index>(soc_cols_.size()));
            for (std::size_t j = 0; j < soc_cols_.size(); ++j)
                g_active_.col(static_cast<Eigen::Index>(j)) = p.soc->G.col(soc_cols_[j]);
            gtg_ = g_active_.transpose() * g_active_;
            Eigen::MatrixXd jg = g_active_;
            jg.bottomRows(q_ - 1) *= -1.0;
            gtjg_ = g_active_.transpose() * jg;
        }
        h_.resize(l_ + q_);
        h_.head(l_) = p.linear_h;
        if (p.soc) h_.tail(q_) = p.soc->h;
    }

    Eigen::Index rows() const { return l_ + q_; }
    Eigen::Index linear_rows() const { return l_; }
    Eigen::Index cone_rows() const { return q_; }
    const Eigen::VectorXd& h() const { return h_; }
    double degree() const { return static_cast<double>(l_) + (q_ > 0 ? 1.0 : 0.0); }

    Eigen::VectorXd mul_g(const Eigen::VectorXd& x) const {
        Eigen::VectorXd out(rows());
        for (Eigen::Index i = 0; i < l_; ++i) {
            double acc = 0.0;
            for (const auto& [col, val] : p_.linear_rows[i].entries) acc += val * x(col);
            out(i) = acc;
        }
        if (q_ > 0) out.tail(q_).noalias() = p_.soc->G * x;
        return out;
    }

    Eigen::VectorXd mul_gt(const Eigen::VectorXd& y) const {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(p_.n);
        for (Eigen::Index i = 0; i < l_; ++i) {
            for (const auto& [col, val] : p_.linear_rows[i].entries) out(col) += val * y(i);
        }
        if (q_ > 0) out.noalias() += p_.soc->G.transpose() * y.tail(q_);
        return out;
    }

    // Normal matrix G^T W^-2 G. The cone block is G^T G for the identity
    // scaling (wbar null), otherwise (2 u u^T - G^T J G) / beta^2 with
    // u = G^T J wbar, since Wbar^-2 = 2 J wbar wbar^T J - J.
    void factor(const Eigen::VectorXd& lin_weight, const Eigen::VectorXd* wbar = nullptr, double beta = 1.0) {
        H_.setZero(p_.n, p_.n);
        for (Eigen::Index i = 0; i < l_; ++i) {
            const double w = lin_weight(i);
            const auto& e = p_.linear_rows[i].entries;
            for (const auto& [a, ga] : e) {
                for (const auto& [b, gb] : e) H_(a, b) += w * ga * gb;
            }
        }
        if (q_ > 0) {
            const auto k = static_cast<Eigen::Index>(soc_cols_.size());
            if (wbar) {
                Eigen::VectorXd jw = *wbar;
                jw.tail(q_ - 1) *= -1.0;
                const Eigen::VectorXd u = g_active_.transpose() * jw;
                const double f = 1.0 / (beta * beta);
                for (Eigen::Index a = 0; a < k; ++a) {
                    for (Eigen::Index b = 0; b < k; ++b)
                        H_(soc_cols_[a], soc_cols_[b]) += f * (2.0 * u(a) * u(b) - gtjg_(a, b));
                }
            } else {
                for (Eigen::Index a = 0; a < k; ++a) {
                    for (Eigen::Index b = 0; b < k; ++b) H_(soc_cols_[a], soc_cols_[b]) += gtg_(a, b);
                }
            }
        }
        llt_.compute(H_);
        if (llt_.info() != Eigen::Success) {
            const double reg = 1e-13 * std::max(1.0, H_.diagonal().maxCoeff());
            H_.diagonal().array() += reg;
            llt_.compute(H_);
            if (llt_.info() != Eigen::Success) throw SolverError("normal equations are singular");
        }
    }

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return llt_.solve(rhs); }

private:
    const ConeProgram& p_;
    Eigen::Index l_;
    Eigen::Index q_ = 0;
    Eigen::VectorXd h_;
    std::vector<int> soc_cols_;
    Eigen::MatrixXd g_active_;  // cone rows of G, active columns only
    Eigen::MatrixXd gtg_;
    Eigen::MatrixXd gtjg_;
    Eigen::MatrixXd H_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
};

// Cone-block helpers (vectors of size q).
Eigen::VectorXd wbar_apply(const Eigen::VectorXd& w, const Eigen::Ref<const Eigen::VectorXd>& v, bool inverse) {
    const Eigen::Index q = w.size();
    const double w0 = w(0);
    const auto w1 = w.tail(q - 1);
    const auto v1 = v.tail(q - 1);
    const double sign = inverse ? -1.0 : 1.0;
    const double w1v1 = w1.dot(v1);
    Eigen::VectorXd out(q);
    out(0) = w0 * v(0) + sign * w1v1;
    out.tail(q - 1) = v1 + (sign * v(0) + w1v1 / (1.0 + w0)) * w1;
    return out;
}

Eigen::VectorXd soc_product(const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::Ref<const Eigen::VectorXd>& v) {
    const Eigen::Index q = u.size();
    Eigen::VectorXd out(q);
    out(0) = u.dot(v);
    out.tail(q - 1) = u(0) * v.tail(q - 1) + v(0) * u.tail(q - 1);
    return out;
}

// Solves u o x = v for x (u in the cone interior).
Eigen::VectorXd soc_divide(const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::Ref<const Eigen::VectorXd>& v) {
    const Eigen::Index q = u.size();
    const auto u1 = u.tail(q - 1);
    const double det = (u(0) - u1.norm()) * (u(0) + u1.norm());
    Eigen::VectorXd out(q);
    out(0) = (u(0) * v(0) - u1.dot(v.tail(q - 1))) / det;
    out.tail(q - 1) = (v.tail(q - 1) - out(0) * u1) / u(0);
    return out;
}

// Largest alpha >= 0 with x + alpha d in the cone (x interior).
double soc_max_step(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& d) {
    const Eigen::Index q = x.size();
    const double a = d(0) * d(0) - d.tail(q - 1).squaredNorm();
    const double b = 2.0 * (x(0) * d(0) - x.tail(q - 1).dot(d.tail(q - 1)));
    const double c = (x(0) - x.tail(q - 1).norm()) * (x(0) + x.tail(q - 1).norm());
    double best = kInf;
    if (std::abs(a) < 1e-300) {
        if (b < 0.0) best = -c / b;
    } else {
        const double disc = b * b - 4.0 * a * c;
        if (disc >= 0.0) {
            const double root = std::sqrt(disc);
            const double qq = -0.5 * (b + (b >= 0.0 ? root : -root));
            const double r1 = qq / a;
            const double r2 = qq != 0.0 ? c / qq : kInf;
            if (r1 > 0.0) best = std::min(best, r1);
            if (r2 > 0.0) best = std::min(best, r2);
        }
    }
    // Leaving through the apex region: x0 + alpha d0 must stay nonnegative.
    if (d(0) < 0.0) best = std::min(best, -x(0) / d(0));
    return best;
}

double max_step(const Kkt& kkt, const Eigen::VectorXd& x, const Eigen::VectorXd& d) {
    double alpha = kInf;
    const Eigen::Index l = kkt.linear_rows();
    for (Eigen::Index i = 0; i < l; ++i) {
        if (d(i) < 0.0) alpha = std::min(alpha, -x(i) / d(i));
    }
    if (kkt.cone_rows() > 0) {
        alpha = std::min(alpha, soc_max_step(x.tail(kkt.cone_rows()), d.tail(kkt.cone_rows())));
    }
    return alpha;
}

// Shifts v into the cone interior when needed: v += (1 + t) e.
void shift_into_cone(const Kkt& kkt, Eigen::VectorXd& v) {
    const Eigen::Index l = kkt.linear_rows();
    const Eigen::Index q = kkt.cone_rows();
    double t = -kInf;
    if (l > 0) t = std::max(t, -v.head(l).minCoeff());
    if (q > 0) t = std::max(t, v.tail(q - 1).norm() - v(l));
    if (t >= -1e-8 * std::max(1.0, v.norm())) {
        if (l > 0) v.head(l).array() += 1.0 + t;
        if (q > 0) v(l) += 1.0 + t;
    }
}

Scaling compute_scaling(const Kkt& kkt, const Eigen::VectorXd& s, const Eigen::VectorXd& z) {
    Scaling w;
    const Eigen::Index l = kkt.linear_rows();
    const Eigen::Index q = kkt.cone_rows();
    w.lambda.resize(l + q);
    w.d = (s.head(l).array() / z.head(l).array()).sqrt();
    w.lambda.head(l) = (s.head(l).array() * z.head(l).array()).sqrt();
    if (q > 0) {
        const Eigen::VectorXd sc = s.tail(q);
        const Eigen::VectorXd zc = z.tail(q);
        const double sn = jnorm(sc);
        const double zn = jnorm(zc);
        if (!(sn > 0.0) || !(zn > 0.0)) throw SolverError("iterate left the second-order cone");
        w.beta = std::sqrt(sn / zn);
        const Eigen::VectorXd sbar = sc / sn;
        const Eigen::VectorXd zbar = zc / zn;
        const double g = std::sqrt(0.5 * (1.0 + sbar.dot(zbar)));
        w.wbar.resize(q);
        w.wbar(0) = (sbar(0) + zbar(0)) / (2.0 * g);
        w.wbar.tail(q - 1) = (sbar.tail(q - 1) - zbar.tail(q - 1)) / (2.0 * g);
        w.lambda.tail(q) = w.beta * wbar_apply(w.wbar, zc, false);
    }
    return w;
}

Eigen::VectorXd apply_w(const Kkt& kkt, const Scaling& w, const Eigen::VectorXd& v, int power) {
    // power in {1, -1}
    const Eigen::Index l = kkt.linear_rows();
    const Eigen::Index q = kkt.cone_rows();
    Eigen::VectorXd out(l + q);
    if (power > 0) {
        out.head(l) = w.d.array() * v.head(l).array();
    } else {
        out.head(l) = v.head(l).array() / w.d.array();
    }
    if (q > 0) {
        const double f = power > 0 ? w.beta : 1.0 / w.beta;
        out.tail(q) = f * wbar_apply(w.wbar, v.tail(q), power < 0);
    }
    return out;
}

Eigen::VectorXd cone_product(const Kkt& kkt, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    const Eigen::Index l = kkt.linear_rows();
    const Eigen::Index q = kkt.cone_rows();
    Eigen::VectorXd out(l + q);
    out.head(l) = u.head(l).array() * v.head(l).array();
    if (q > 0) out.tail(q) = soc_product(u.tail(q), v.tail(q));
    return out;
}

Eigen::VectorXd cone_divide(const Kkt& kkt, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    const Eigen::Index l = kkt.linear_rows();
    const Eigen::Index q = kkt.cone_rows();
    Eigen::VectorXd out(l + q);
    out.head(l) = v.head(l).array() / u.head(l).array();
    if (q > 0) out.tail(q) = soc_divide(u.tail(q), v.tail(q));
    return out;
}

Eigen::VectorXd identity_element(const Kkt& kkt) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(kkt.rows());
    e.head(kkt.linear_rows()).setOnes();
    if (kkt.cone_rows() > 0) e(kkt.linear_rows()) = 1.0;
    return e;
}

struct Direction {
    Eigen::VectorXd dx, ds, dz;
};

class NewtonSystem {
public:
    NewtonSystem(Kkt& kkt, const Scaling& w) : kkt_(kkt), w_(w) {
        const Eigen::Index l = kkt.linear_rows();
        const Eigen::Index q = kkt.cone_rows();
        const Eigen::VectorXd lin_weight = (1.0 / w.d.array().square()).matrix();
        if (q > 0) {
            kkt.factor(lin_weight.head(l), &w.wbar, w.beta);
        } else {
            kkt.factor(lin_weight.head(l));
        }
    }

    // Solves G^T dz = d_x, G dx + ds = d_z, lambda o (W^-1 ds + W dz) = d_s.
    Direction solve(const Eigen::VectorXd& d_x, const Eigen::VectorXd& d_z, const Eigen::VectorXd& d_s) const {
        const Eigen::VectorXd r = cone_divide(kkt_, w_.lambda, d_s);
        const Eigen::VectorXd wr = apply_w(kkt_, w_, r, 1);
        const Eigen::VectorXd rhs_z = d_z - wr;
        const Eigen::VectorXd tmp = apply_w(kkt_, w_, apply_w(kkt_, w_, rhs_z, -1), -1);
        Direction dir;
        dir.dx = kkt_.solve(d_x + kkt_.mul_gt(tmp));
        dir.dz = apply_w(kkt_, w_, apply_w(kkt_, w_, kkt_.mul_g(dir.dx) - rhs_z, -1), -1);
        // Refine against the dual equation G^T dz = d_x.
        for (int k = 0; k < 2; ++k) {
            const Eigen::VectorXd res = d_x - kkt_.mul_gt(dir.dz);
            if (res.lpNorm<Eigen::Infinity>() <= 1e-15 * std::max(1.0, d_x.lpNorm<Eigen::Infinity>())) break;
            const Eigen::VectorXd corr = kkt_.solve(res);
            dir.dx += corr;
            dir.dz += apply_w(kkt_, w_, apply_w(kkt_, w_, kkt_.mul_g(corr), -1), -1);
        }
        // Primal equation taken exactly; W^2 W^-2 loses accuracy near the boundary.
        dir.ds = d_z - kkt_.mul_g(dir.dx);
        return dir;
    }

private:
    Kkt& kkt_;
    const Scaling& w_;
};

}  // namespace

ConeSolution solve_cone_program(const ConeProgram& program, const ConeSolverOptions& options) {
    if (program.c.size() != program.n) throw SolverError("cost vector size does not match variable count");
    if (program.linear_h.size() != static_cast<Eigen::Index>(program.linear_rows.size())) {
        throw SolverError("linear right-hand side size mismatch");
    }
    Kkt kkt(program);
    const Eigen::VectorXd& h = kkt.h();
    const Eigen::VectorXd& c = program.c;
    const double h_scale = std::max(1.0, h.norm());
    const double c_scale = std::max(1.0, c.norm());
    const Eigen::VectorXd e = identity_element(kkt);

    // Starting point: least-squares primal, least-norm dual, shifted into the cone.
    ConeSolution sol;
    {
        const Eigen::VectorXd ones = Eigen::VectorXd::Ones(kkt.linear_rows());
        kkt.factor(ones);
        sol.x = kkt.solve(kkt.mul_gt(h));
        sol.s = h - kkt.mul_g(sol.x);
        sol.z = kkt.mul_g(kkt.solve(-c));
        shift_into_cone(kkt, sol.s);
        shift_into_cone(kkt, sol.z);
    }

    const double nu = kkt.degree();
    auto converged = [&](double pres, double dres, double gap, double pobj) {
        return pres <= options.feasibility_tol && dres <= options.feasibility_tol &&
               gap <= options.gap_tol * std::max(1.0, std::abs(pobj));
    };

    for (int it = 0; it <= options.max_iterations; ++it) {
        const Eigen::VectorXd r_z = kkt.mul_g(sol.x) + sol.s - h;
        const Eigen::VectorXd r_x = kkt.mul_gt(sol.z) + c;
        sol.primal_residual = r_z.norm() / h_scale;
        sol.dual_residual = r_x.norm() / c_scale;
        sol.gap = sol.s.dot(sol.z);
        sol.primal_objective = c.dot(sol.x);
        sol.dual_objective = -h.dot(sol.z);
        sol.iterations = it;
        if (!std::isfinite(sol.gap) || !std::isfinite(sol.primal_residual) || !std::isfinite(sol.dual_residual)) {
            throw SolverError("interior-point iteration produced non-finite values");
        }
        if (converged(sol.primal_residual, sol.dual_residual, sol.gap, sol.primal_objective)) return sol;
        if (it == options.max_iterations) break;

        const double mu = sol.gap / nu;
        const Scaling w = compute_scaling(kkt, sol.s, sol.z);
        const NewtonSystem newton(kkt, w);

        // Predictor.
        const Eigen::VectorXd lambda_sq = cone_product(kkt, w.lambda, w.lambda);
        const Direction aff = newton.solve(-r_x, -r_z, -lambda_sq);
        const double alpha_aff =
            std::min(1.0, std::min(max_step(kkt, sol.s, aff.ds), max_step(kkt, sol.z, aff.dz)));
        const double gap_aff = (sol.s + alpha_aff * aff.ds).dot(sol.z + alpha_aff * aff.dz);
        const double sigma = std::clamp(std::pow(std::max(gap_aff, 0.0) / sol.gap, 3.0), 0.0, 1.0);

        // Corrector with Mehrotra second-order term.
        const Eigen::VectorXd ds_scaled = apply_w(kkt, w, aff.ds, -1);
        const Eigen::VectorXd dz_scaled = apply_w(kkt, w, aff.dz, 1);
        const Eigen::VectorXd d_s = -lambda_sq - cone_product(kkt, ds_scaled, dz_scaled) + sigma * mu * e;
        const Direction dir = newton.solve(-r_x, -r_z, d_s);

        const double alpha_max = std::min(max_step(kkt, sol.s, dir.ds), max_step(kkt, sol.z, dir.dz));
        const double alpha = std::min(1.0, options.step_fraction * alpha_max);
        if (!(alpha > 1e-14)) break;
        sol.x += alpha * dir.dx;
        sol.s += alpha * dir.ds;
        sol.z += alpha * dir.dz;
    }
    throw SolverError("interior-point method stopped after " + std::to_string(sol.iterations) +
                      " iterations (primal residual " + fmt_sci(sol.primal_residual) + ", dual residual " +
                      fmt_sci(sol.dual_residual) + ", gap " + fmt_sci(sol.gap) + ")");
}

}  // namespace relp
