#pragma once

#include <cstddef>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "pmjls/linalg.h"

namespace pmjls::sdp {

// Modeling layer for linear SDPs
//
//   minimize    c^T x
//   subject to  F_0^(b) + sum_c x_c F_c^(b)  PSD   for every LMI block b
//               a_e^T x = r_e                      for every equality e
//
// over scalar components x. A variable (scalar, symmetric matrix, general
// matrix) is a contiguous range of components. Symmetric variables store
// one component per lower-triangle entry.

/// Scaled lower-triangular stacking, row by row: (0,0), (1,0), (1,1),
/// (2,0), ... with off-diagonals multiplied by sqrt(2), so that
/// <Svec(A), Svec(B)> = tr(AB). Throws std::invalid_argument if `s` is not
/// symmetric within 1e-12.
Vector Svec(const Matrix& s);
/// Inverse of Svec. Throws std::invalid_argument unless the length is a
/// triangular number.
Matrix Smat(const Vector& v);

struct ScalarVar {
  int index = -1;
};
struct SymmetricVar {
  int first = -1;
  int dim = 0;
};
struct MatrixVar {
  int first = -1;
  int rows = 0;
  int cols = 0;
};

/// Matrix-valued affine expression  constant + sum_c x_c * term(c).
class AffineExpr {
 public:
  AffineExpr() = default;
  AffineExpr(int rows, int cols);

  static AffineExpr Constant(const Matrix& value);
  static AffineExpr Of(ScalarVar v);
  static AffineExpr Of(const SymmetricVar& v);
  static AffineExpr Of(const MatrixVar& v);
  /// v * I_n.
  static AffineExpr ScaledIdentity(ScalarVar v, int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const Matrix& constant() const { return constant_; }
  const std::map<int, Matrix>& terms() const { return terms_; }

  AffineExpr operator+(const AffineExpr& o) const;
  AffineExpr operator-(const AffineExpr& o) const;
  AffineExpr operator*(double s) const;
  AffineExpr operator*(const Matrix& right) const;
  friend AffineExpr operator*(const Matrix& left, const AffineExpr& e);
  AffineExpr Transpose() const;

  Matrix Evaluate(const std::vector<double>& x) const;

 private:
  void AddTerm(int component, const Matrix& coeff);

  int rows_ = 0;
  int cols_ = 0;
  Matrix constant_;
  std::map<int, Matrix> terms_;
};

/// Symmetric block matrix built from blocks on and below the diagonal; the
/// upper part is filled by transposition. Unset blocks are zero.
class BlockLmi {
 public:
  explicit BlockLmi(std::vector<int> block_sizes);
  void Set(int row, int col, AffineExpr block);
  AffineExpr Assemble() const;

 private:
  std::vector<int> sizes_;
  std::vector<int> offsets_;
  std::map<std::pair<int, int>, AffineExpr> blocks_;
};

struct LmiConstraint {
  std::string label;
  AffineExpr expr;  // symmetric, square
};

struct LinearEquality {
  std::string label;
  AffineExpr expr;  // 1x1, constrained to equal zero
};

enum class VariableKind { kScalar, kSymmetric, kMatrix };

struct VariableInfo {
  std::string name;
  VariableKind kind;
  int first;
  int rows;
  int cols;
};

enum class ConeKind { kZero, kNonnegative, kPsdTriangle };

struct ConeSpec {
  ConeKind kind;
  int dim;  // matrix side for kPsdTriangle, vector length otherwise
};

/// Standard conic form  min q^T x  s.t.  A x + s = b,  s in K.
/// A is column-compressed (CSC). PSD slacks use the Svec convention.
struct ConicForm {
  int num_vars = 0;
  int num_rows = 0;
  std::vector<double> q;
  std::vector<std::size_t> colptr;
  std::vector<std::size_t> rowval;
  std::vector<double> nzval;
  std::vector<double> b;
  std::vector<ConeSpec> cones;
  double objective_offset = 0.0;
};

class SdpProblem {
 public:
  ScalarVar AddScalar(std::string name);
  SymmetricVar AddSymmetric(std::string name, int dim);
  MatrixVar AddMatrix(std::string name, int rows, int cols);

  /// objective += expr (1x1). The problem is a minimization.
  void AddObjective(const AffineExpr& expr);
  /// Appends `expr PSD`. Throws std::invalid_argument if expr is not square,
  /// any coefficient is asymmetric beyond 1e-12, or it references an
  /// undeclared component.
  void AddLmi(const AffineExpr& expr, std::string label);
  /// Appends `expr == 0` for a 1x1 expression.
  void AddEquality(const AffineExpr& expr, std::string label);

  int num_components() const { return num_components_; }
  const std::vector<VariableInfo>& variables() const { return variables_; }
  const std::vector<LmiConstraint>& lmis() const { return lmis_; }
  const std::vector<LinearEquality>& equalities() const { return equalities_; }
  const AffineExpr& objective() const { return objective_; }

  /// Deterministic: identical problems give identical arrays.
  ConicForm ToConicForm() const;

  /// Plain-text sparse dump of every LMI block, one nonzero per line:
  ///   block_id variable_id row col coefficient
  /// variable_id -1 denotes the constant term; only row >= col is written.
  void WriteSparseDump(std::ostream& os) const;

 private:
  void CheckComponents(const AffineExpr& e, const std::string& label) const;

  int num_components_ = 0;
  std::vector<VariableInfo> variables_;
  AffineExpr objective_ = AffineExpr(1, 1);
  std::vector<LmiConstraint> lmis_;
  std::vector<LinearEquality> equalities_;
};

// --- backend contract --------------------------------------------------------

enum class BackendStatus {
  kSolved,
  kAlmostSolved,
  kPrimalInfeasible,
  kDualInfeasible,
  kFailed,
};

struct BackendResult {
  BackendStatus status = BackendStatus::kFailed;
  std::vector<double> x;
  int iterations = 0;
  double solve_seconds = 0.0;
  std::string message;
};

/// A conic solver that accepts ConicForm with zero, nonnegative and PSD
/// triangle cones. Implementations need not be reentrant.
class SdpBackend {
 public:
  virtual ~SdpBackend() = default;
  virtual std::string name() const = 0;
  virtual BackendResult Solve(const ConicForm& form) = 0;
};

enum class SolveStatus { kOptimal, kInfeasible, kNumericalFailure };

std::string ToString(SolveStatus s);
std::string ToString(BackendStatus s);

/// Tolerance for the independent post-solve constraint check.
inline constexpr double kMaxConstraintViolation = 1e-6;

struct SdpSolution {
  SolveStatus status = SolveStatus::kNumericalFailure;
  BackendStatus backend_status = BackendStatus::kFailed;
  std::vector<double> values;
  double objective_value = 0.0;
  /// max over blocks of max(0, -lambda_min(F(x))) / scale(F(x)) and over
  /// equalities of |a^T x - r|, where scale(F) = max(1, max |F_ij|).
  double max_constraint_violation = 0.0;
  std::string worst_constraint;
  int iterations = 0;
  double solve_seconds = 0.0;
  std::string diagnostics;

  double Value(ScalarVar v) const;
  Matrix Value(const SymmetricVar& v) const;
  Matrix Value(const MatrixVar& v) const;
};

/// Recomputes lambda_min of every block and every equality residual at `x`.
/// Returns the max violation (as defined on SdpSolution) and its label.
std::pair<double, std::string> MaxConstraintViolation(
    const SdpProblem& problem, const std::vector<double>& x);

/// Converts to conic form, calls the backend, and re-verifies the returned
/// point independently. A solved status whose point violates any constraint
/// by more than kMaxConstraintViolation is reported as kNumericalFailure.
SdpSolution Solve(const SdpProblem& problem, SdpBackend& backend);

}  // namespace pmjls::sdp
