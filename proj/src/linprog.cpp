#include "pdmpc/linprog.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pdmpc/kernels.hpp"

namespace pdmpc::linprog {

void StandardFormLP::resize(std::size_t vars) {
  n = vars;
  objective.assign(n, 0.0);
  lower.assign(n, 0.0);
  upper.assign(n, kInf);
}

void StandardFormLP::add_eq(std::vector<double> coef, double rhs) {
  eq_rows.push_back({std::move(coef), rhs});
}

void StandardFormLP::add_ineq(std::vector<double> coef, double rhs) {
  ineq_rows.push_back({std::move(coef), rhs});
}

void StandardFormLP::validate() const {
  if (n == 0) throw ValidationError("LP has no variables");
  if (objective.size() != n || lower.size() != n || upper.size() != n)
    throw ValidationError("LP objective/bounds sized differently from n");
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(objective[j]))
      throw ValidationError("LP objective coefficients must be finite");
    if (!std::isfinite(lower[j]))
      throw ValidationError("LP lower bounds must be finite");
    if (lower[j] > upper[j])
      throw ValidationError("LP has lower > upper at variable " +
                            std::to_string(j));
  }
  auto check_rows = [this](const std::vector<Row>& rows, const char* what) {
    for (const auto& r : rows) {
      if (r.coef.size() != n)
        throw ValidationError(std::string(what) + " row length != n");
      if (!std::isfinite(r.rhs))
        throw ValidationError(std::string(what) + " rhs must be finite");
      for (double c : r.coef)
        if (!std::isfinite(c))
          throw ValidationError(std::string(what) + " coefficient not finite");
    }
  };
  check_rows(eq_rows, "equality");
  check_rows(ineq_rows, "inequality");
}

const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::NumericalFailure: return "numerical_failure";
  }
  return "?";
}

double max_violation(const StandardFormLP& lp, const std::vector<double>& v) {
  double worst = 0.0;
  auto dotrow = [&](const StandardFormLP::Row& r) {
    double acc = 0.0;
    for (std::size_t j = 0; j < lp.n; ++j) acc += r.coef[j] * v[j];
    return acc;
  };
  for (const auto& r : lp.eq_rows)
    worst = std::max(worst,
                     std::abs(dotrow(r) - r.rhs) / std::max(1.0, std::abs(r.rhs)));
  for (const auto& r : lp.ineq_rows)
    worst = std::max(worst,
                     (r.rhs - dotrow(r)) / std::max(1.0, std::abs(r.rhs)));
  for (std::size_t j = 0; j < lp.n; ++j) {
    worst = std::max(worst, (lp.lower[j] - v[j]) /
                                std::max(1.0, std::abs(lp.lower[j])));
    if (std::isfinite(lp.upper[j]))
      worst = std::max(worst, (v[j] - lp.upper[j]) /
                                  std::max(1.0, std::abs(lp.upper[j])));
  }
  return std::max(worst, 0.0);
}

std::string dump(const StandardFormLP& lp) {
  std::ostringstream out;
  out.precision(12);
  out << "min";
  for (std::size_t j = 0; j < lp.n; ++j) out << ' ' << lp.objective[j];
  out << '\n';
  for (const auto& r : lp.eq_rows) {
    out << "eq ";
    for (double c : r.coef) out << c << ' ';
    out << "= " << r.rhs << '\n';
  }
  for (const auto& r : lp.ineq_rows) {
    out << "ge ";
    for (double c : r.coef) out << c << ' ';
    out << ">= " << r.rhs << '\n';
  }
  out << "bounds";
  for (std::size_t j = 0; j < lp.n; ++j)
    out << " [" << lp.lower[j] << ',' << lp.upper[j] << ']';
  out << '\n';
  return out.str();
}

namespace {

enum class VStat : unsigned char { Basic, AtLower, AtUpper };

// Two-phase primal simplex with bounded variables on a dense tableau.
// Columns: structural | surplus (one per >= row) | artificial (one per row).
// The tableau row layout is [columns..., B^-1 b]; basic-variable values are
// tracked separately because nonbasic variables sit at nonzero bounds.
class Simplex {
 public:
  Simplex(const StandardFormLP& lp, const SolveOptions& opts)
      : lp_(lp), opts_(opts), k_(pdmpc::kernels::active()) {
    m1_ = lp.eq_rows.size();
    m2_ = lp.ineq_rows.size();
    m_ = m1_ + m2_;
    nstruct_ = lp.n;
    nreal_ = nstruct_ + m2_;
    N_ = nreal_ + m_;
    W_ = N_ + 1;  // + rhs column
    cap_ = 1000 + 60 * static_cast<long>(N_ + m_);
  }

  LPSolution run();

 private:
  double* row(std::size_t i) { return T_.data() + i * W_; }

  double value_of(std::size_t j) const {
    switch (status_[j]) {
      case VStat::Basic: return xB_[where_[j]];
      case VStat::AtLower: return lb_[j];
      case VStat::AtUpper: return ub_[j];
    }
    return 0.0;
  }

  void build_tableau();
  void pivot(std::size_t r, std::size_t jcol);
  void refresh_basics();
  double phase_objective() const;
  // One simplex iteration; returns false when the phase is optimal.
  // Sets failure_ on unbounded rays (phase 2) or numerical trouble.
  bool iterate();
  void enter_phase2();

  const StandardFormLP& lp_;
  SolveOptions opts_;
  const pdmpc::kernels::Kernels& k_;

  std::size_t m1_ = 0, m2_ = 0, m_ = 0;
  std::size_t nstruct_ = 0, nreal_ = 0, N_ = 0, W_ = 0;

  std::vector<double> T_;       // m_ rows by W_ cols
  std::vector<double> objrow_;  // reduced costs, length N_
  std::vector<double> cvec_;    // phase-2 costs over all columns
  std::vector<double> lb_, ub_;
  std::vector<VStat> status_;
  std::vector<std::size_t> basic_;  // row -> column
  std::vector<long> where_;         // column -> row (valid when Basic)
  std::vector<double> xB_;

  int phase_ = 1;
  long iters_ = 0;
  long cap_ = 0;
  long stall_ = 0;
  double best_obj_ = kInf;
  bool bland_ = false;
  SolveStatus failure_ = SolveStatus::Optimal;  // set on abnormal exit
};

void Simplex::build_tableau() {
  T_.assign(m_ * W_, 0.0);
  lb_.assign(N_, 0.0);
  ub_.assign(N_, kInf);
  status_.assign(N_, VStat::AtLower);
  where_.assign(N_, -1);
  basic_.assign(m_, 0);
  xB_.assign(m_, 0.0);
  cvec_.assign(N_, 0.0);

  for (std::size_t j = 0; j < nstruct_; ++j) {
    lb_[j] = lp_.lower[j];
    ub_[j] = lp_.upper[j];
    cvec_[j] = lp_.objective[j];
  }

  for (std::size_t i = 0; i < m_; ++i) {
    const auto& src = i < m1_ ? lp_.eq_rows[i] : lp_.ineq_rows[i - m1_];
    double* t = row(i);
    for (std::size_t j = 0; j < nstruct_; ++j) t[j] = src.coef[j];
    if (i >= m1_) t[nstruct_ + (i - m1_)] = -1.0;  // surplus for >= rows
    t[N_] = src.rhs;

    // Residual at the all-at-lower-bound starting point decides the
    // artificial's sign; scale the row so the artificial enters at +1
    // with a nonnegative value.
    double ax = 0.0;
    for (std::size_t j = 0; j < nreal_; ++j) ax += t[j] * lb_[j];
    double resid = t[N_] - ax;
    if (resid < 0.0) k_.scale(-1.0, t, W_);
    std::size_t art = nreal_ + i;
    t[art] = 1.0;
    basic_[i] = art;
    status_[art] = VStat::Basic;
    where_[art] = static_cast<long>(i);
    xB_[i] = std::abs(resid);
  }

  // Phase-1 reduced costs: minimize the artificial sum (all c_B = 1).
  objrow_.assign(N_, 0.0);
  for (std::size_t j = 0; j < nreal_; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m_; ++i) acc += row(i)[j];
    objrow_[j] = -acc;
  }
}

void Simplex::pivot(std::size_t r, std::size_t jcol) {
  double* pr = row(r);
  k_.scale(1.0 / pr[jcol], pr, W_);
  pr[jcol] = 1.0;
  for (std::size_t i = 0; i < m_; ++i) {
    if (i == r) continue;
    double* pi = row(i);
    double f = pi[jcol];
    if (f != 0.0) {
      k_.axpy(-f, pr, pi, W_);
      pi[jcol] = 0.0;
    }
  }
  double f = objrow_[jcol];
  if (f != 0.0) {
    k_.axpy(-f, pr, objrow_.data(), N_);
    objrow_[jcol] = 0.0;
  }
}

void Simplex::refresh_basics() {
  for (std::size_t i = 0; i < m_; ++i) {
    const double* t = row(i);
    double acc = t[N_];
    for (std::size_t j = 0; j < nreal_; ++j) {
      if (status_[j] == VStat::Basic) continue;
      double v = status_[j] == VStat::AtLower ? lb_[j] : ub_[j];
      if (v != 0.0) acc -= t[j] * v;
    }
    xB_[i] = acc;
  }
}

double Simplex::phase_objective() const {
  if (phase_ == 1) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m_; ++i)
      if (basic_[i] >= nreal_) acc += xB_[i];
    return acc;
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < nstruct_; ++j)
    if (cvec_[j] != 0.0) acc += cvec_[j] * value_of(j);
  return acc;
}

bool Simplex::iterate() {
  const double pivtol = 1e-9;

  // --- pricing: pick the entering column (artificials never re-enter)
  std::size_t jin = N_;
  int dir = 0;
  double best = opts_.opt_tol;
  for (std::size_t j = 0; j < nreal_; ++j) {
    if (ub_[j] <= lb_[j]) continue;  // fixed variables cannot move
    double d = objrow_[j];
    int cand_dir = 0;
    if (status_[j] == VStat::AtLower && d < -opts_.opt_tol)
      cand_dir = +1;
    else if (status_[j] == VStat::AtUpper && d > opts_.opt_tol)
      cand_dir = -1;
    if (cand_dir == 0) continue;
    if (bland_) {  // smallest eligible index
      jin = j;
      dir = cand_dir;
      break;
    }
    if (std::abs(d) > best) {  // Dantzig; first index wins ties
      best = std::abs(d);
      jin = j;
      dir = cand_dir;
    }
  }
  if (jin == N_) return false;  // phase optimal

  // --- ratio test
  const double tie_eps = 1e-9;
  double span = ub_[jin] - lb_[jin];
  double tmin = span;  // moving jin across its own range is always allowed
  long rleave = -1;    // -1 marks the bound-flip case
  bool leave_to_upper = false;
  double best_piv = 0.0;
  for (std::size_t i = 0; i < m_; ++i) {
    double a = row(i)[jin];
    if (std::abs(a) <= pivtol) continue;
    double delta = -dir * a;  // xB_i moves by delta per unit of t
    std::size_t bj = basic_[i];
    double t;
    bool to_upper;
    if (delta < 0.0) {
      t = (xB_[i] - lb_[bj]) / -delta;
      to_upper = false;
    } else {
      if (!std::isfinite(ub_[bj])) continue;
      t = (ub_[bj] - xB_[i]) / delta;
      to_upper = true;
    }
    if (t < 0.0) t = 0.0;  // degenerate basics can sit a rounding hair outside
    bool better;
    if (t < tmin - tie_eps) {
      better = true;
    } else if (t <= tmin + tie_eps && rleave >= 0) {
      // tie: prefer the larger pivot for stability; under Bland's rule the
      // smallest basic-variable index instead, for finiteness
      better = bland_ ? bj < basic_[static_cast<std::size_t>(rleave)]
                      : std::abs(a) > best_piv;
    } else {
      better = t <= tmin + tie_eps;  // first basic hit at the flip bound
    }
    if (better) {
      tmin = std::min(t, tmin);
      rleave = static_cast<long>(i);
      leave_to_upper = to_upper;
      best_piv = std::abs(a);
    }
  }

  if (!std::isfinite(tmin)) {
    failure_ = phase_ == 2 ? SolveStatus::Unbounded : SolveStatus::NumericalFailure;
    return false;
  }

  if (rleave < 0) {
    // bound flip: jin runs to its other bound, no basis change
    for (std::size_t i = 0; i < m_; ++i) {
      double a = row(i)[jin];
      if (a != 0.0) xB_[i] -= dir * a * tmin;
    }
    status_[jin] = dir > 0 ? VStat::AtUpper : VStat::AtLower;
  } else {
    auto r = static_cast<std::size_t>(rleave);
    double enter_val = value_of(jin) + dir * tmin;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      double a = row(i)[jin];
      if (a != 0.0) xB_[i] -= dir * a * tmin;
    }
    std::size_t lv = basic_[r];
    status_[lv] = leave_to_upper ? VStat::AtUpper : VStat::AtLower;
    where_[lv] = -1;
    pivot(r, jin);
    basic_[r] = jin;
    status_[jin] = VStat::Basic;
    where_[jin] = rleave;
    xB_[r] = enter_val;
  }

  ++iters_;
  if (iters_ % 256 == 0) refresh_basics();

  // stall detection drives the switch to Bland's rule
  double obj = phase_objective();
  if (obj < best_obj_ - 1e-12 * (1.0 + std::abs(best_obj_))) {
    best_obj_ = obj;
    stall_ = 0;
  } else if (!bland_ && ++stall_ > 2 * static_cast<long>(N_)) {
    bland_ = true;
  }
  return true;
}

void Simplex::enter_phase2() {
  phase_ = 2;
  best_obj_ = kInf;
  stall_ = 0;
  bland_ = false;

  // Artificials are pinned to zero from here on. A basic artificial (at
  // value zero after a successful phase 1) is pivoted onto any usable real
  // column; a row with no such column is redundant and its artificial can
  // stay basic at zero without ever constraining the ratio test.
  for (std::size_t j = nreal_; j < N_; ++j) ub_[j] = 0.0;
  for (std::size_t i = 0; i < m_; ++i) {
    if (basic_[i] < nreal_) continue;
    const double* t = row(i);
    std::size_t jbest = N_;
    double abest = 1e-7;
    for (std::size_t j = 0; j < nreal_; ++j) {
      if (status_[j] == VStat::Basic) continue;
      if (std::abs(t[j]) > abest) {
        abest = std::abs(t[j]);
        jbest = j;
      }
    }
    if (jbest == N_) continue;
    std::size_t lv = basic_[i];
    double enter_val = value_of(jbest);  // a zero-length move: xB_i stays 0
    status_[lv] = VStat::AtLower;
    where_[lv] = -1;
    pivot(i, jbest);
    basic_[i] = jbest;
    status_[jbest] = VStat::Basic;
    where_[jbest] = static_cast<long>(i);
    xB_[i] = enter_val;
  }

  // Real reduced costs: c - c_B B^-1 A, assembled from the updated tableau.
  objrow_ = cvec_;
  for (std::size_t i = 0; i < m_; ++i) {
    double cb = cvec_[basic_[i]];
    if (cb != 0.0) k_.axpy(-cb, row(i), objrow_.data(), N_);
  }
  for (std::size_t i = 0; i < m_; ++i) objrow_[basic_[i]] = 0.0;

  refresh_basics();
}

LPSolution Simplex::run() {
  LPSolution out;
  build_tableau();

  double rhs_scale = 1.0;
  for (std::size_t i = 0; i < m_; ++i)
    rhs_scale = std::max(rhs_scale, std::abs(row(i)[N_]));

  while (iterate()) {
    if (iters_ >= cap_) {
      out.status = SolveStatus::NumericalFailure;
      out.iterations = iters_;
      return out;
    }
  }
  if (failure_ != SolveStatus::Optimal) {
    out.status = failure_;
    out.iterations = iters_;
    return out;
  }

  refresh_basics();
  if (phase_objective() > opts_.feas_tol * rhs_scale) {
    out.status = SolveStatus::Infeasible;
    out.iterations = iters_;
    return out;
  }

  enter_phase2();
  while (iterate()) {
    if (iters_ >= cap_) {
      out.status = SolveStatus::NumericalFailure;
      out.iterations = iters_;
      return out;
    }
  }
  if (failure_ != SolveStatus::Optimal) {
    out.status = failure_;
    out.iterations = iters_;
    return out;
  }

  refresh_basics();
  out.values.resize(nstruct_);
  for (std::size_t j = 0; j < nstruct_; ++j) out.values[j] = value_of(j);
  out.objective_value = 0.0;
  for (std::size_t j = 0; j < nstruct_; ++j)
    out.objective_value += lp_.objective[j] * out.values[j];
  out.iterations = iters_;

  // the solve's own certificate: never hand back an Optimal that fails
  // the independent residual check
  out.status = max_violation(lp_, out.values) <= opts_.feas_tol
                   ? SolveStatus::Optimal
                   : SolveStatus::NumericalFailure;
  return out;
}

}  // namespace

LPSolution solve(const StandardFormLP& lp, const SolveOptions& opts) {
  lp.validate();
  Simplex s(lp, opts);
  return s.run();
}

}  // namespace pdmpc::linprog
