#include "pmjls/sdp.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace pmjls::sdp {

namespace {

constexpr double kSymmetryTolerance = 1e-12;

int TriangularIndex(int row, int col) {
  // lower triangle, row by row
  return row * (row + 1) / 2 + col;
}

void RequireSameShape(const AffineExpr& a, const AffineExpr& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("AffineExpr: shape mismatch");
  }
}

}  // namespace

Vector Svec(const Matrix& s) {
  if (s.rows() != s.cols()) throw std::invalid_argument("Svec: not square");
  if (AsymmetryMax(s) > kSymmetryTolerance) {
    throw std::invalid_argument("Svec: matrix is not symmetric");
  }
  const int d = static_cast<int>(s.rows());
  Vector v(d * (d + 1) / 2);
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c <= r; ++c) {
      v(TriangularIndex(r, c)) =
          r == c ? s(r, c) : std::numbers::sqrt2 * 0.5 * (s(r, c) + s(c, r));
    }
  }
  return v;
}

Matrix Smat(const Vector& v) {
  const double root = (std::sqrt(8.0 * static_cast<double>(v.size()) + 1.0) - 1.0) / 2.0;
  const int d = static_cast<int>(std::lround(root));
  if (d * (d + 1) / 2 != v.size()) {
    throw std::invalid_argument("Smat: length " + std::to_string(v.size()) +
                                " is not a triangular number");
  }
  Matrix s(d, d);
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c <= r; ++c) {
      const double x = v(TriangularIndex(r, c));
      if (r == c) {
        s(r, c) = x;
      } else {
        s(r, c) = s(c, r) = x / std::numbers::sqrt2;
      }
    }
  }
  return s;
}

// --- AffineExpr ---------------------------------------------------------------

AffineExpr::AffineExpr(int rows, int cols)
    : rows_(rows), cols_(cols), constant_(Matrix::Zero(rows, cols)) {}

AffineExpr AffineExpr::Constant(const Matrix& value) {
  AffineExpr e(static_cast<int>(value.rows()), static_cast<int>(value.cols()));
  e.constant_ = value;
  return e;
}

AffineExpr AffineExpr::Of(ScalarVar v) {
  AffineExpr e(1, 1);
  e.AddTerm(v.index, Matrix::Ones(1, 1));
  return e;
}

AffineExpr AffineExpr::ScaledIdentity(ScalarVar v, int n) {
  AffineExpr e(n, n);
  e.AddTerm(v.index, Matrix::Identity(n, n));
  return e;
}

AffineExpr AffineExpr::Of(const SymmetricVar& v) {
  AffineExpr e(v.dim, v.dim);
  for (int r = 0; r < v.dim; ++r) {
    for (int c = 0; c <= r; ++c) {
      Matrix coeff = Matrix::Zero(v.dim, v.dim);
      coeff(r, c) = 1.0;
      coeff(c, r) = 1.0;
      e.AddTerm(v.first + TriangularIndex(r, c), coeff);
    }
  }
  return e;
}

AffineExpr AffineExpr::Of(const MatrixVar& v) {
  AffineExpr e(v.rows, v.cols);
  for (int c = 0; c < v.cols; ++c) {
    for (int r = 0; r < v.rows; ++r) {
      Matrix coeff = Matrix::Zero(v.rows, v.cols);
      coeff(r, c) = 1.0;
      e.AddTerm(v.first + c * v.rows + r, coeff);
    }
  }
  return e;
}

void AffineExpr::AddTerm(int component, const Matrix& coeff) {
  auto [it, inserted] = terms_.try_emplace(component, coeff);
  if (!inserted) it->second += coeff;
}

AffineExpr AffineExpr::operator+(const AffineExpr& o) const {
  RequireSameShape(*this, o);
  AffineExpr out = *this;
  out.constant_ += o.constant_;
  for (const auto& [c, m] : o.terms_) out.AddTerm(c, m);
  return out;
}

AffineExpr AffineExpr::operator-(const AffineExpr& o) const {
  return *this + o * -1.0;
}

AffineExpr AffineExpr::operator*(double s) const {
  AffineExpr out = *this;
  out.constant_ *= s;
  for (auto& [c, m] : out.terms_) m *= s;
  return out;
}

AffineExpr AffineExpr::operator*(const Matrix& right) const {
  if (right.rows() != cols_) {
    throw std::invalid_argument("AffineExpr * Matrix: inner dimension mismatch");
  }
  AffineExpr out(rows_, static_cast<int>(right.cols()));
  out.constant_ = constant_ * right;
  for (const auto& [c, m] : terms_) out.terms_.emplace(c, m * right);
  return out;
}

AffineExpr operator*(const Matrix& left, const AffineExpr& e) {
  if (left.cols() != e.rows_) {
    throw std::invalid_argument("Matrix * AffineExpr: inner dimension mismatch");
  }
  AffineExpr out(static_cast<int>(left.rows()), e.cols_);
  out.constant_ = left * e.constant_;
  for (const auto& [c, m] : e.terms_) out.terms_.emplace(c, left * m);
  return out;
}

AffineExpr AffineExpr::Transpose() const {
  AffineExpr out(cols_, rows_);
  out.constant_ = constant_.transpose();
  for (const auto& [c, m] : terms_) out.terms_.emplace(c, m.transpose());
  return out;
}

Matrix AffineExpr::Evaluate(const std::vector<double>& x) const {
  Matrix out = constant_;
  for (const auto& [c, m] : terms_) {
    if (c < 0 || c >= static_cast<int>(x.size())) {
      throw std::out_of_range("AffineExpr::Evaluate: component out of range");
    }
    out += x[c] * m;
  }
  return out;
}

// --- BlockLmi -------------------------------------------------------------------

BlockLmi::BlockLmi(std::vector<int> block_sizes) : sizes_(std::move(block_sizes)) {
  int offset = 0;
  for (int s : sizes_) {
    offsets_.push_back(offset);
    offset += s;
  }
}

void BlockLmi::Set(int row, int col, AffineExpr block) {
  if (row < col) throw std::invalid_argument("BlockLmi::Set: upper block given");
  if (block.rows() != sizes_.at(row) || block.cols() != sizes_.at(col)) {
    throw std::invalid_argument("BlockLmi::Set: block (" + std::to_string(row) +
                                "," + std::to_string(col) + ") has wrong shape");
  }
  blocks_.insert_or_assign({row, col}, std::move(block));
}

AffineExpr BlockLmi::Assemble() const {
  const int n = offsets_.empty() ? 0 : offsets_.back() + sizes_.back();
  // Place every block into an n x n zero expression via selection matrices.
  AffineExpr out(n, n);
  for (const auto& [rc, blk] : blocks_) {
    const auto [r, c] = rc;
    Matrix left = Matrix::Zero(n, sizes_[r]);
    left.block(offsets_[r], 0, sizes_[r], sizes_[r]).setIdentity();
    Matrix right = Matrix::Zero(sizes_[c], n);
    right.block(0, offsets_[c], sizes_[c], sizes_[c]).setIdentity();
    AffineExpr placed = left * blk * right;
    if (r == c) {
      out = out + placed;
    } else {
      out = out + placed + placed.Transpose();
    }
  }
  return out;
}

// --- SdpProblem -------------------------------------------------------------

ScalarVar SdpProblem::AddScalar(std::string name) {
  ScalarVar v{num_components_};
  variables_.push_back({std::move(name), VariableKind::kScalar, v.index, 1, 1});
  num_components_ += 1;
  return v;
}

SymmetricVar SdpProblem::AddSymmetric(std::string name, int dim) {
  if (dim < 1) throw std::invalid_argument("AddSymmetric: dim must be >= 1");
  SymmetricVar v{num_components_, dim};
  variables_.push_back({std::move(name), VariableKind::kSymmetric, v.first, dim, dim});
  num_components_ += dim * (dim + 1) / 2;
  return v;
}

MatrixVar SdpProblem::AddMatrix(std::string name, int rows, int cols) {
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("AddMatrix: shape must be positive");
  }
  MatrixVar v{num_components_, rows, cols};
  variables_.push_back({std::move(name), VariableKind::kMatrix, v.first, rows, cols});
  num_components_ += rows * cols;
  return v;
}

void SdpProblem::CheckComponents(const AffineExpr& e,
                                 const std::string& label) const {
  for (const auto& [c, m] : e.terms()) {
    if (c < 0 || c >= num_components_) {
      throw std::invalid_argument("constraint '" + label +
                                  "' references an undeclared variable");
    }
  }
}

void SdpProblem::AddObjective(const AffineExpr& expr) {
  if (expr.rows() != 1 || expr.cols() != 1) {
    throw std::invalid_argument("AddObjective: expression must be 1x1");
  }
  CheckComponents(expr, "objective");
  objective_ = objective_ + expr;
}

void SdpProblem::AddLmi(const AffineExpr& expr, std::string label) {
  if (expr.rows() != expr.cols() || expr.rows() == 0) {
    throw std::invalid_argument("LMI '" + label + "' is not square");
  }
  CheckComponents(expr, label);
  if (AsymmetryMax(expr.constant()) > kSymmetryTolerance) {
    throw std::invalid_argument("LMI '" + label + "' has an asymmetric constant");
  }
  for (const auto& [c, m] : expr.terms()) {
    if (AsymmetryMax(m) > kSymmetryTolerance) {
      throw std::invalid_argument("LMI '" + label +
                                  "' has an asymmetric coefficient");
    }
  }
  lmis_.push_back({std::move(label), expr});
}

void SdpProblem::AddEquality(const AffineExpr& expr, std::string label) {
  if (expr.rows() != 1 || expr.cols() != 1) {
    throw std::invalid_argument("AddEquality: expression must be 1x1");
  }
  CheckComponents(expr, label);
  equalities_.push_back({std::move(label), expr});
}

ConicForm SdpProblem::ToConicForm() const {
  ConicForm f;
  f.num_vars = num_components_;
  f.q.assign(num_components_, 0.0);
  for (const auto& [c, m] : objective_.terms()) f.q[c] = m(0, 0);
  f.objective_offset = objective_.constant()(0, 0);

  // Triplets per column, rows in increasing order.
  std::vector<std::vector<std::pair<std::size_t, double>>> columns(num_components_);
  std::size_t row = 0;

  if (!equalities_.empty()) {
    for (const auto& eq : equalities_) {
      // a^T x + r = 0  ->  s = -r - a^T x in {0}
      for (const auto& [c, m] : eq.expr.terms()) {
        if (m(0, 0) != 0.0) columns[c].emplace_back(row, m(0, 0));
      }
      f.b.push_back(-eq.expr.constant()(0, 0));
      ++row;
    }
    f.cones.push_back({ConeKind::kZero, static_cast<int>(equalities_.size())});
  }

  for (const auto& lmi : lmis_) {
    // F0 + sum x_c F_c PSD  ->  s = svec(F0) - A x, column c of A = -svec(F_c)
    const Vector b0 = Svec(Symmetrize(lmi.expr.constant()));
    for (Eigen::Index t = 0; t < b0.size(); ++t) f.b.push_back(b0(t));
    for (const auto& [c, m] : lmi.expr.terms()) {
      const Vector col = Svec(Symmetrize(m));
      for (Eigen::Index t = 0; t < col.size(); ++t) {
        if (col(t) != 0.0) columns[c].emplace_back(row + t, -col(t));
      }
    }
    row += b0.size();
    f.cones.push_back({ConeKind::kPsdTriangle, lmi.expr.rows()});
  }
  f.num_rows = static_cast<int>(row);

  f.colptr.reserve(num_components_ + 1);
  f.colptr.push_back(0);
  for (auto& col : columns) {
    std::sort(col.begin(), col.end());
    for (const auto& [r, v] : col) {
      f.rowval.push_back(r);
      f.nzval.push_back(v);
    }
    f.colptr.push_back(f.rowval.size());
  }
  return f;
}

void SdpProblem::WriteSparseDump(std::ostream& os) const {
  os << "# pmjls sparse LMI dump\n"
     << "# block_id variable_id row col coefficient  (variable_id -1 = constant; row >= col)\n";
  for (const auto& v : variables_) {
    os << "# var " << v.name << " first=" << v.first << " shape=" << v.rows
       << "x" << v.cols << "\n";
  }
  os << std::setprecision(17);
  for (std::size_t b = 0; b < lmis_.size(); ++b) {
    const auto& e = lmis_[b].expr;
    os << "# block " << b << " " << lmis_[b].label << " dim=" << e.rows() << "\n";
    auto emit = [&](int var, const Matrix& m) {
      for (int r = 0; r < m.rows(); ++r) {
        for (int c = 0; c <= r; ++c) {
          if (m(r, c) != 0.0) {
            os << b << " " << var << " " << r << " " << c << " " << m(r, c) << "\n";
          }
        }
      }
    };
    emit(-1, e.constant());
    for (const auto& [c, m] : e.terms()) emit(c, m);
  }
}

// --- solve ------------------------------------------------------------------

std::string ToString(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kNumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

std::string ToString(BackendStatus s) {
  switch (s) {
    case BackendStatus::kSolved: return "solved";
    case BackendStatus::kAlmostSolved: return "almost-solved";
    case BackendStatus::kPrimalInfeasible: return "primal-infeasible";
    case BackendStatus::kDualInfeasible: return "dual-infeasible";
    case BackendStatus::kFailed: return "failed";
  }
  return "unknown";
}

double SdpSolution::Value(ScalarVar v) const { return values.at(v.index); }

Matrix SdpSolution::Value(const SymmetricVar& v) const {
  Matrix out(v.dim, v.dim);
  for (int r = 0; r < v.dim; ++r) {
    for (int c = 0; c <= r; ++c) {
      out(r, c) = out(c, r) = values.at(v.first + TriangularIndex(r, c));
    }
  }
  return out;
}

Matrix SdpSolution::Value(const MatrixVar& v) const {
  Matrix out(v.rows, v.cols);
  for (int c = 0; c < v.cols; ++c) {
    for (int r = 0; r < v.rows; ++r) out(r, c) = values.at(v.first + c * v.rows + r);
  }
  return out;
}

std::pair<double, std::string> MaxConstraintViolation(
    const SdpProblem& problem, const std::vector<double>& x) {
  double worst = 0.0;
  std::string label;
  for (const auto& lmi : problem.lmis()) {
    const Matrix f = lmi.expr.Evaluate(x);
    const double scale = std::max(1.0, f.cwiseAbs().maxCoeff());
    const double v = std::max(0.0, -MinEigenvalue(f)) / scale;
    if (label.empty() || v > worst) {
      worst = v;
      label = lmi.label;
    }
  }
  for (const auto& eq : problem.equalities()) {
    const double v = std::abs(eq.expr.Evaluate(x)(0, 0));
    if (v > worst) {
      worst = v;
      label = eq.label;
    }
  }
  return {worst, label};
}

SdpSolution Solve(const SdpProblem& problem, SdpBackend& backend) {
  SdpSolution sol;
  const ConicForm form = problem.ToConicForm();
  BackendResult r;
  try {
    r = backend.Solve(form);
  } catch (const std::exception& e) {
    sol.status = SolveStatus::kNumericalFailure;
    sol.diagnostics = backend.name() + " threw: " + e.what();
    return sol;
  }
  sol.backend_status = r.status;
  sol.iterations = r.iterations;
  sol.solve_seconds = r.solve_seconds;
  sol.diagnostics = backend.name() + ": " + ToString(r.status) +
                    (r.message.empty() ? "" : " (" + r.message + ")");

  switch (r.status) {
    case BackendStatus::kPrimalInfeasible:
      sol.status = SolveStatus::kInfeasible;
      return sol;
    case BackendStatus::kDualInfeasible:
      sol.status = SolveStatus::kNumericalFailure;
      sol.diagnostics += "; objective unbounded below";
      return sol;
    case BackendStatus::kFailed:
      sol.status = SolveStatus::kNumericalFailure;
      return sol;
    case BackendStatus::kSolved:
    case BackendStatus::kAlmostSolved:
      break;
  }
  if (static_cast<int>(r.x.size()) != problem.num_components()) {
    sol.status = SolveStatus::kNumericalFailure;
    sol.diagnostics += "; backend returned a point of the wrong size";
    return sol;
  }
  sol.values = std::move(r.x);
  sol.objective_value = problem.objective().Evaluate(sol.values)(0, 0);
  auto [violation, label] = MaxConstraintViolation(problem, sol.values);
  sol.max_constraint_violation = violation;
  sol.worst_constraint = label;
  if (violation > kMaxConstraintViolation) {
    sol.status = SolveStatus::kNumericalFailure;
    std::ostringstream os;
    os << "; re-check failed: '" << label << "' violated by " << violation;
    sol.diagnostics += os.str();
  } else {
    sol.status = SolveStatus::kOptimal;
  }
  return sol;
}

}  // namespace pmjls::sdp
