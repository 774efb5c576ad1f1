#pragma once

// Global assembly of the mixed u-p(-phi) system, Dirichlet reduction, Newton
// iteration with step halving, probes and the time-stepping driver.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Sparse>

#include "magfem/element.hpp"
#include "magfem/linear_solver.hpp"
#include "magfem/problem.hpp"

namespace magfem {

/// Global unknown numbering: u interleaved per node, then p at corner nodes,
/// then phi per node (coupled problems only).
struct DofMap {
  int n_nodes = 0;
  int n_u = 0;
  int n_p = 0;
  int n_phi = 0;
  std::vector<int> p_index;  ///< node -> pressure number, -1 if none

  explicit DofMap(const MixedMesh& m = {}, bool coupled = false) {
    n_nodes = m.num_nodes();
    n_u = 3 * n_nodes;
    p_index.assign(n_nodes, -1);
    for (int node : m.pressure_nodes()) p_index[node] = n_p++;
    n_phi = coupled ? n_nodes : 0;
  }

  int size() const { return n_u + n_p + n_phi; }
  int u(int node, int c) const { return 3 * node + c; }
  int p(int node) const { return n_u + p_index[node]; }
  int phi(int node) const { return n_u + n_p + node; }
  bool coupled() const { return n_phi > 0; }

  /// Element dofs in the local block order [u (81), p (8), phi (27)].
  std::vector<int> element_dofs(const MixedMesh& m, int e) const {
    std::vector<int> d;
    d.reserve(coupled() ? 116 : 89);
    for (int a = 0; a < 27; ++a)
      for (int c = 0; c < 3; ++c) d.push_back(u(m.elems_u[e][a], c));
    for (int n : m.elems_p[e]) d.push_back(p(n));
    if (coupled())
      for (int a = 0; a < 27; ++a) d.push_back(phi(m.elems_u[e][a]));
    return d;
  }
};

/// Convergence history of one time step.
struct StepReport {
  int step = 0;
  double t = 0.0;
  int iterations = 0;             ///< residual evaluations of the final attempt
  int cuts = 0;                   ///< number of halvings needed
  int evaluations = 0;            ///< residual evaluations over all attempts, failed ones included
  std::vector<double> residuals;  ///< norms of the final attempt, first entry = reference
  std::vector<std::vector<double>> substep_residuals;
  std::vector<double> probe_values;
};

struct AssemblyStats {
  double max_abs_J_minus_1 = 0.0;
  double min_J = 1e300;
};

inline int default_thread_count() {
  if (const char* s = std::getenv("MAGFEM_THREADS")) {
    const int n = std::atoi(s);
    if (n > 0) return n;
  }
  return 1;
}

class Solver {
 public:
  explicit Solver(Problem problem) : prob_(std::move(problem)) {
    prob_.validate();
    coupled_ = prob_.coupled();
    dofs_ = DofMap(prob_.mesh, coupled_);
    ga_ = galpha_params(prob_.solver.rho_inf);
    threads_ = prob_.solver.threads > 0 ? prob_.solver.threads : default_thread_count();
    U_ = Eigen::VectorXd::Zero(dofs_.size());
    init_states();
    build_constraints();
    build_pattern();
    locate_probes();
    t_ = prob_.time.t_start;
  }

  const Problem& problem() const { return prob_; }
  const DofMap& dofs() const { return dofs_; }
  const Eigen::VectorXd& solution() const { return U_; }
  Eigen::VectorXd& solution() { return U_; }
  const std::vector<QuadPointState>& quad_states() const { return qp_; }
  std::vector<QuadPointState>& quad_states() { return qp_; }
  double time() const { return t_; }
  int step() const { return step_; }
  void set_time(double t, int step) {
    t_ = t;
    step_ = step;
  }
  const std::vector<char>& constrained() const { return fixed_; }
  const AssemblyStats& stats() const { return stats_; }
  const Eigen::VectorXd& residual() const { return R_; }
  const SparseMatrix& matrix() const { return K_; }
  double running_reference() const { return ref_max_; }
  void set_running_reference(double r) { ref_max_ = r; }

  /// Prescribed value of every constrained dof at time t.
  Eigen::VectorXd prescribed(double t) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(dofs_.size());
    for (const auto& [dof, bc] : dirichlet_dofs_) g(dof) = prob_.dirichlet[bc].program(t);
    return g;
  }

  /// Assembles the full residual (and stiffness unless residual_only) at the
  /// current solution for loads at time t and step size dt.
  void assemble(double t, double dt, bool residual_only = false) {
    const auto& mesh = prob_.mesh;
    const int ne = mesh.num_elems();
    ElementContext ctx;
    ctx.ga = ga_;
    ctx.dt = dt;
    ctx.Ba = prob_.applied_field(t);
    ctx.coupled = coupled_;
    ctx.residual_only = residual_only;

    R_.setZero(dofs_.size());
    if (!residual_only) std::fill(K_.valuePtr(), K_.valuePtr() + K_.nonZeros(), 0.0);
    stats_ = {};

    const int batch = std::max(1, 16 * threads_);
    std::vector<ElementBlocks> blocks(batch);
    std::vector<std::exception_ptr> errors(batch);
    for (int first = 0; first < ne; first += batch) {
      const int count = std::min(batch, ne - first);
      auto work = [&](int tid) {
        for (int b = tid; b < count; b += threads_) {
          try {
            const int e = first + b;
            element_kernel(mesh, e, prob_.material(mesh.region[e]), gather(e),
                           std::span<QuadPointState>(qp_.data() + e * kQuadPerElem, kQuadPerElem),
                           ctx, blocks[b]);
          } catch (...) {
            errors[b] = std::current_exception();
          }
        }
      };
      if (threads_ > 1) {
        std::vector<std::thread> pool;
        for (int tid = 0; tid < threads_; ++tid) pool.emplace_back(work, tid);
        for (auto& th : pool) th.join();
      } else {
        work(0);
      }
      for (int b = 0; b < count; ++b) {
        if (errors[b]) std::rethrow_exception(errors[b]);
        scatter(first + b, blocks[b], residual_only);
      }
    }
    add_neumann(t);
  }

  /// Advances from the current time to t_next, halving on failure.
  StepReport advance_to(double t_next) {
    StepReport rep;
    rep.step = step_ + 1;
    rep.t = t_next;
    const Snapshot snap{U_, qp_};
    const double ref = ref_max_;
    try {
      attempt(t_, t_next, 0, rep);
    } catch (...) {
      U_ = snap.U;
      qp_ = snap.qp;
      ref_max_ = ref;
      throw;
    }
    t_ = t_next;
    ++step_;
    rep.probe_values = evaluate_probes();
    return rep;
  }

  /// Runs the whole schedule; `on_step` sees every converged step.
  std::vector<StepReport> run(const std::function<void(const StepReport&)>& on_step = {}) {
    std::vector<StepReport> out;
    const auto& tg = prob_.time;
    for (int k = step_ + 1; k <= tg.steps; ++k) {
      out.push_back(advance_to(tg.time_of(k)));
      if (on_step) on_step(out.back());
    }
    return out;
  }

  /// Field values at a reference point.
  Vector3 displacement_at(const Vector3& X) const { return field_at(X).u; }
  double potential_at(const Vector3& X) const { return field_at(X).phi; }
  double pressure_at(const Vector3& X) const { return field_at(X).p; }

  std::vector<double> evaluate_probes() const {
    std::vector<double> v;
    for (std::size_t i = 0; i < prob_.probes.size(); ++i) {
      const auto& ps = prob_.probes[i];
      switch (ps.kind) {
        case ProbeKind::Displacement:
          v.push_back(field_at(probe_loc_[i]).u(ps.component));
          break;
        case ProbeKind::Potential:
          v.push_back(field_at(probe_loc_[i]).phi);
          break;
        case ProbeKind::Pressure:
          v.push_back(field_at(probe_loc_[i]).p);
          break;
        case ProbeKind::MaxAbsJMinus1:
          v.push_back(stats_.max_abs_J_minus_1);
          break;
        case ProbeKind::MinJ:
          v.push_back(stats_.min_J);
          break;
        case ProbeKind::Reaction: {
          double s = 0.0;
          for (int n : prob_.mesh.node_set(ps.set)) s += R_(dofs_.u(n, ps.component));
          v.push_back(s);
          break;
        }
      }
    }
    return v;
  }

  struct PointLocation {
    int elem = -1;
    Vector3 xi = Vector3::Zero();
  };

  /// Element and parametric coordinates of a reference point.
  PointLocation locate(const Vector3& X) const {
    const auto& m = prob_.mesh;
    const double tol = 1e-9;
    for (int e = 0; e < m.num_elems(); ++e) {
      Vector3 lo = Vector3::Constant(1e300), hi = Vector3::Constant(-1e300);
      for (int n : m.elems_u[e]) {
        lo = lo.cwiseMin(m.nodes[n]);
        hi = hi.cwiseMax(m.nodes[n]);
      }
      const double h = (hi - lo).maxCoeff();
      if (((X - lo).array() < -tol * h).any() || ((X - hi).array() > tol * h).any()) continue;
      Vector3 xi = Vector3::Constant(0.5);
      for (int it = 0; it < 30; ++it) {
        const auto s = shape_bq2(xi);
        Vector3 x = Vector3::Zero();
        Tensor2 Jac = Tensor2::Zero();
        for (int a = 0; a < 27; ++a) {
          x += s.N(a) * m.nodes[m.elems_u[e][a]];
          Jac += m.nodes[m.elems_u[e][a]] * s.dN.row(a);
        }
        const Vector3 dxi = inv3(Jac) * (X - x);
        xi += dxi;
        if (dxi.norm() < 1e-14) break;
      }
      if ((xi.array() >= -1e-8).all() && (xi.array() <= 1.0 + 1e-8).all())
        return {e, xi.cwiseMax(0.0).cwiseMin(1.0)};
    }
    std::ostringstream msg;
    msg << "point (" << X.transpose() << ") lies outside the mesh";
    throw ConfigError(msg.str());
  }

  struct PointFields {
    Vector3 u = Vector3::Zero();
    double phi = 0.0;
    double p = 0.0;
  };

  PointFields field_at(const PointLocation& loc) const {
    const auto& m = prob_.mesh;
    const auto s = shape_bq2(loc.xi);
    const auto s1 = shape_bq1(loc.xi);
    PointFields f;
    for (int a = 0; a < 27; ++a) {
      const int n = m.elems_u[loc.elem][a];
      for (int c = 0; c < 3; ++c) f.u(c) += s.N(a) * U_(dofs_.u(n, c));
      if (coupled_) f.phi += s.N(a) * U_(dofs_.phi(n));
    }
    for (int c = 0; c < 8; ++c) f.p += s1.N(c) * U_(dofs_.p(m.elems_p[loc.elem][c]));
    return f;
  }

  PointFields field_at(const Vector3& X) const { return field_at(locate(X)); }

  ElementFields gather(int e) const {
    const auto& m = prob_.mesh;
    ElementFields f;
    for (int a = 0; a < 27; ++a) {
      const int n = m.elems_u[e][a];
      for (int c = 0; c < 3; ++c) f.u(a, c) = U_(dofs_.u(n, c));
      if (coupled_) f.phi(a) = U_(dofs_.phi(n));
    }
    for (int c = 0; c < 8; ++c) f.p(c) = U_(dofs_.p(m.elems_p[e][c]));
    return f;
  }

  /// Norm of the residual restricted to free dofs.
  double free_residual_norm() const {
    double s = 0.0;
    for (int i = 0; i < dofs_.size(); ++i)
      if (!fixed_[i]) s += R_(i) * R_(i);
    return std::sqrt(s);
  }

 private:
  void init_states() {
    const auto& m = prob_.mesh;
    qp_.clear();
    qp_.reserve(static_cast<std::size_t>(m.num_elems()) * kQuadPerElem);
    for (int e = 0; e < m.num_elems(); ++e) {
      const auto& spec = prob_.material(m.region[e]);
      for (int q = 0; q < kQuadPerElem; ++q)
        qp_.push_back(initial_quad_point_state(spec.maxwell_branches));
    }
  }

  void build_constraints() {
    fixed_.assign(dofs_.size(), 0);
    dirichlet_dofs_.clear();
    std::map<int, int> owner;
    for (std::size_t b = 0; b < prob_.dirichlet.size(); ++b) {
      const auto& bc = prob_.dirichlet[b];
      for (int n : prob_.mesh.node_set(bc.set)) {
        const int dof = bc.field == Field::Displacement ? dofs_.u(n, bc.component) : dofs_.phi(n);
        owner[dof] = static_cast<int>(b);  // later conditions override earlier ones
      }
    }
    for (const auto& [dof, b] : owner) {
      fixed_[dof] = 1;
      dirichlet_dofs_.emplace_back(dof, b);
    }
    reduced_.assign(dofs_.size(), -1);
    n_free_ = 0;
    for (int i = 0; i < dofs_.size(); ++i)
      if (!fixed_[i]) reduced_[i] = n_free_++;
  }

  void build_pattern() {
    const auto& m = prob_.mesh;
    const int n = dofs_.size();
    std::vector<std::vector<int>> cols(n);
    for (int e = 0; e < m.num_elems(); ++e) {
      const auto d = dofs_.element_dofs(m, e);
      for (int c : d)
        for (int r : d) cols[c].push_back(r);
    }
    std::vector<Eigen::Triplet<double>> trip;
    for (int c = 0; c < n; ++c) {
      auto& v = cols[c];
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
      for (int r : v) trip.emplace_back(r, c, 0.0);
    }
    K_.resize(n, n);
    K_.setFromTriplets(trip.begin(), trip.end());
    K_.makeCompressed();

    auto slot = [&](int r, int c) {
      const int* begin = K_.innerIndexPtr() + K_.outerIndexPtr()[c];
      const int* end = K_.innerIndexPtr() + K_.outerIndexPtr()[c + 1];
      return static_cast<int>(std::lower_bound(begin, end, r) - K_.innerIndexPtr());
    };
    slots_.resize(m.num_elems());
    for (int e = 0; e < m.num_elems(); ++e) {
      const auto d = dofs_.element_dofs(m, e);
      const int nl = static_cast<int>(d.size());
      auto& s = slots_[e];
      s.resize(static_cast<std::size_t>(nl) * nl);
      for (int c = 0; c < nl; ++c)
        for (int r = 0; r < nl; ++r) s[r + nl * c] = slot(d[r], d[c]);
    }

    // reduced matrix over free dofs and the map full slot -> reduced slot
    std::vector<Eigen::Triplet<double>> rt;
    for (int c = 0; c < n; ++c) {
      if (fixed_[c]) continue;
      for (SparseMatrix::InnerIterator it(K_, c); it; ++it)
        if (!fixed_[it.row()]) rt.emplace_back(reduced_[it.row()], reduced_[c], 0.0);
    }
    Kff_.resize(n_free_, n_free_);
    Kff_.setFromTriplets(rt.begin(), rt.end());
    Kff_.makeCompressed();
    to_reduced_.assign(K_.nonZeros(), -1);
    fixed_col_entries_.clear();
    for (int c = 0; c < n; ++c) {
      for (int k = K_.outerIndexPtr()[c]; k < K_.outerIndexPtr()[c + 1]; ++k) {
        const int r = K_.innerIndexPtr()[k];
        if (fixed_[r]) continue;
        if (fixed_[c]) {
          fixed_col_entries_.push_back({k, reduced_[r], c});
        } else {
          const int rc = reduced_[c];
          const int* begin = Kff_.innerIndexPtr() + Kff_.outerIndexPtr()[rc];
          const int* end = Kff_.innerIndexPtr() + Kff_.outerIndexPtr()[rc + 1];
          to_reduced_[k] =
              static_cast<int>(std::lower_bound(begin, end, reduced_[r]) - Kff_.innerIndexPtr());
        }
      }
    }
    lin_.analyze(Kff_);
  }

  void locate_probes() {
    probe_loc_.clear();
    for (const auto& ps : prob_.probes) {
      if (ps.kind == ProbeKind::Displacement || ps.kind == ProbeKind::Potential ||
          ps.kind == ProbeKind::Pressure)
        probe_loc_.push_back(locate(ps.point));
      else
        probe_loc_.push_back({});
      if (ps.kind == ProbeKind::Reaction) prob_.mesh.node_set(ps.set);
    }
  }

  void scatter(int e, const ElementBlocks& b, bool residual_only) {
    const auto d = dofs_.element_dofs(prob_.mesh, e);
    const int nl = static_cast<int>(d.size());
    for (int i = 0; i < 81; ++i) R_(d[i]) += b.R_u(i);
    for (int i = 0; i < 8; ++i) R_(d[81 + i]) += b.R_p(i);
    if (coupled_)
      for (int i = 0; i < 27; ++i) R_(d[89 + i]) += b.R_phi(i);
    stats_.max_abs_J_minus_1 = std::max(stats_.max_abs_J_minus_1, b.max_abs_J_minus_1);
    stats_.min_J = std::min(stats_.min_J, b.min_J);
    if (residual_only) return;

    double* val = K_.valuePtr();
    const auto& s = slots_[e];
    auto add = [&](int r, int c, double v) { val[s[r + nl * c]] += v; };
    for (int c = 0; c < 81; ++c)
      for (int r = 0; r < 81; ++r) add(r, c, b.K_uu(r, c));
    for (int c = 0; c < 8; ++c)
      for (int r = 0; r < 81; ++r) {
        add(r, 81 + c, b.K_up(r, c));
        add(81 + c, r, b.K_up(r, c));
      }
    for (int c = 0; c < 8; ++c)
      for (int r = 0; r < 8; ++r) add(81 + r, 81 + c, b.K_pp(r, c));
    if (coupled_) {
      for (int c = 0; c < 27; ++c)
        for (int r = 0; r < 81; ++r) {
          add(r, 89 + c, b.K_uphi(r, c));
          add(89 + c, r, b.K_phiu(c, r));
        }
      for (int c = 0; c < 27; ++c)
        for (int r = 0; r < 27; ++r) add(89 + r, 89 + c, b.K_phiphi(r, c));
    }
  }

  void add_neumann(double t) {
    for (const auto& bc : prob_.neumann) {
      const double v = bc.program(t);
      if (v == 0.0) continue;
      for (const auto& fr : prob_.mesh.face_set(bc.set)) {
        const auto w = face_load_weights(prob_.mesh, fr);
        const auto loc = face_nodes_bq2(fr.face);
        for (int c = 0; c < 9; ++c) {
          const int n = prob_.mesh.elems_u[fr.elem][loc[c]];
          if (bc.kind == NeumannKind::Traction) {
            for (int i = 0; i < 3; ++i) R_(dofs_.u(n, i)) -= w[c] * v * bc.direction(i);
          } else if (coupled_) {
            R_(dofs_.phi(n)) -= w[c] * v;
          }
        }
      }
    }
  }

  void load_reduced_matrix() {
    std::fill(Kff_.valuePtr(), Kff_.valuePtr() + Kff_.nonZeros(), 0.0);
    const double* v = K_.valuePtr();
    double* rv = Kff_.valuePtr();
    for (std::size_t k = 0; k < to_reduced_.size(); ++k)
      if (to_reduced_[k] >= 0) rv[to_reduced_[k]] = v[k];
  }

  Eigen::VectorXd reduced_residual() const {
    Eigen::VectorXd r(n_free_);
    for (int i = 0; i < dofs_.size(); ++i)
      if (!fixed_[i]) r(reduced_[i]) = R_(i);
    return r;
  }

  struct Snapshot {
    Eigen::VectorXd U;
    std::vector<QuadPointState> qp;
  };

  void attempt(double ta, double tb, int depth, StepReport& rep) {
    const Snapshot snap{U_, qp_};
    std::string why;
    std::vector<double> hist;
    try {
      const bool ok = newton(ta, tb, hist);
      rep.evaluations += static_cast<int>(hist.size());
      if (ok) {
        for (auto& q : qp_) commit(q);
        rep.residuals = hist;
        rep.iterations = static_cast<int>(hist.size());
        rep.substep_residuals.push_back(std::move(hist));
        return;
      }
      why = "no convergence in " + std::to_string(prob_.solver.max_iter) + " iterations";
    } catch (const GentLockingLimit& e) {
      rep.evaluations += static_cast<int>(hist.size());
      why = e.what();
    } catch (const NonPositiveJacobian& e) {
      rep.evaluations += static_cast<int>(hist.size());
      why = e.what();
    } catch (const SingularTensor& e) {
      rep.evaluations += static_cast<int>(hist.size());
      why = e.what();
    } catch (const SingularSystem& e) {
      rep.evaluations += static_cast<int>(hist.size());
      why = e.what();
    }
    U_ = snap.U;
    qp_ = snap.qp;
    if (depth >= prob_.solver.max_halvings) {
      std::ostringstream msg;
      msg << "Newton failed at step " << rep.step << " (t = " << tb << ") after " << depth
          << " halvings: " << why;
      throw DivergedNonlinear(msg.str(), rep.step);
    }
    rep.cuts = std::max(rep.cuts, depth + 1);
    const double tm = 0.5 * (ta + tb);
    attempt(ta, tm, depth + 1, rep);
    attempt(tm, tb, depth + 1, rep);
  }

  bool newton(double ta, double tb, std::vector<double>& hist) {
    const auto& st = prob_.solver;
    const double dt = tb - ta;
    const Eigen::VectorXd g = prescribed(tb);

    // predictor: linearized response to the prescribed increment
    assemble(tb, dt);
    Eigen::VectorXd dc = Eigen::VectorXd::Zero(dofs_.size());
    for (const auto& [dof, bc] : dirichlet_dofs_) dc(dof) = g(dof) - U_(dof);
    Eigen::VectorXd rhs = reduced_residual();
    const double* v = K_.valuePtr();
    for (const auto& fe : fixed_col_entries_) rhs(fe.row) += v[fe.slot] * dc(fe.col);
    double r = rhs.norm();
    hist.push_back(r);
    ref_max_ = std::max(ref_max_, r);
    const double ref = ref_max_;
    if (dc.norm() == 0.0 && (r <= st.tol_abs || r <= st.tol_rel * ref)) return true;
    for (int it = 0; it < st.max_iter; ++it) {
      load_reduced_matrix();
      lin_.factorize(Kff_);
      const Eigen::VectorXd dx = lin_.solve(-rhs);
      if (!dx.allFinite()) return false;
      const Eigen::VectorXd U0 = U_;
      for (int damp = 0;; ++damp) {
        const double a = std::ldexp(1.0, -damp);
        for (int i = 0; i < dofs_.size(); ++i)
          U_(i) = U0(i) + (fixed_[i] ? dc(i) : a * dx(reduced_[i]));
        try {
          assemble(tb, dt);
          break;
        } catch (const NonPositiveJacobian&) {
          if (damp >= kMaxDamping) throw;
        } catch (const GentLockingLimit&) {
          if (damp >= kMaxDamping) throw;
        }
      }
      dc.setZero();
      rhs = reduced_residual();
      r = rhs.norm();
      hist.push_back(r);
      if (!std::isfinite(r)) return false;
      if (r <= st.tol_abs || r <= st.tol_rel * ref) return true;
      if (r > 1e8 * ref) return false;
    }
    return false;
  }

  static constexpr int kMaxDamping = 5;

  struct FixedColEntry {
    int slot;
    int row;  ///< reduced row
    int col;  ///< full column (constrained dof)
  };

  Problem prob_;
  bool coupled_ = false;
  DofMap dofs_;
  GAlphaParams ga_;
  int threads_ = 1;
  Eigen::VectorXd U_;
  Eigen::VectorXd R_;
  std::vector<QuadPointState> qp_;
  std::vector<char> fixed_;
  std::vector<std::pair<int, int>> dirichlet_dofs_;  ///< (dof, condition index)
  std::vector<int> reduced_;
  int n_free_ = 0;
  SparseMatrix K_;
  SparseMatrix Kff_;
  std::vector<std::vector<int>> slots_;
  std::vector<int> to_reduced_;
  std::vector<FixedColEntry> fixed_col_entries_;
  SparseDirectSolver lin_;
  std::vector<PointLocation> probe_loc_;
  AssemblyStats stats_;
  double t_ = 0.0;
  int step_ = 0;
  double ref_max_ = 0.0;
};

}  // namespace magfem
