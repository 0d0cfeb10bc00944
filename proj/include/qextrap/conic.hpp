#pragma once

#include <memory>
#include <string>
#include <vector>

#include "qextrap/linalg.hpp"

namespace qextrap::conic {

struct Term {
  int var;
  double coef;
  bool operator==(const Term&) const = default;
};

// Affine expression sum(coef * var) + constant.
class LinearExpr {
 public:
  LinearExpr() = default;
  explicit LinearExpr(double constant) : constant_(constant) {}
  static LinearExpr variable(int var, double coef = 1.0);

  LinearExpr& add(int var, double coef);
  LinearExpr& operator+=(const LinearExpr& o);
  LinearExpr& operator-=(const LinearExpr& o);
  LinearExpr& operator*=(double s);
  LinearExpr& operator+=(double c) { constant_ += c; return *this; }

  // Sorts by variable and merges duplicates; drops exact zeros.
  LinearExpr& normalize();

  const std::vector<Term>& terms() const { return terms_; }
  double constant() const { return constant_; }
  double evaluate(const RVector& x) const;

 private:
  std::vector<Term> terms_;
  double constant_ = 0.0;
};

LinearExpr operator+(LinearExpr a, const LinearExpr& b);
LinearExpr operator-(LinearExpr a, const LinearExpr& b);
LinearExpr operator*(double s, LinearExpr a);

enum class ConeKind { Free, NonNegative, PSD };

struct Cone {
  ConeKind kind;
  int size;    // scalar count, or matrix order for PSD
  int offset;  // first variable index
  int num_vars() const { return kind == ConeKind::PSD ? size * (size + 1) / 2 : size; }
  bool operator==(const Cone&) const = default;
};

enum class Relation { Equal, LessEqual, GreaterEqual };

struct Constraint {
  std::vector<Term> terms;
  Relation relation;
  double rhs;
  bool operator==(const Constraint&) const = default;
};

enum class Sense { Minimize, Maximize };

// Variables are partitioned into cones in creation order. A PSD cone of order n owns
// n(n+1)/2 variables, one per upper-triangle entry in row-major order; a coefficient v on
// entry (i,j) contributes v * Y(i,j).
class ConicProgram {
 public:
  int add_free(int count);
  int add_nonnegative(int count);
  int add_psd(int order);  // returns the cone index

  int psd_entry(int cone, int i, int j) const;
  int num_variables() const { return num_vars_; }
  const std::vector<Cone>& cones() const { return cones_; }
  const Cone& cone(int k) const { return cones_.at(k); }

  void add_constraint(LinearExpr e, Relation rel, double rhs = 0.0);
  void set_objective(Sense s, LinearExpr e);

  const std::vector<Constraint>& constraints() const { return constraints_; }
  Sense sense() const { return sense_; }
  const std::vector<Term>& objective() const { return objective_; }
  double objective_constant() const { return objective_constant_; }

  bool operator==(const ConicProgram&) const = default;

 private:
  std::vector<Cone> cones_;
  std::vector<Constraint> constraints_;
  std::vector<Term> objective_;
  double objective_constant_ = 0.0;
  Sense sense_ = Sense::Minimize;
  int num_vars_ = 0;
};

RMatrix psd_value(const ConicProgram& p, int cone, const RVector& x);

// Hermitian d×d variable stored as an unstructured real PSD block Y of order 2d.
// X = (A + C)/2 + i (B - B^T)/2 for Y = [[A, B^T], [B, C]]; Y ⪰ 0 implies X ⪰ 0, and
// X ⪰ 0 gives the feasible Y = [[Re X, -Im X], [Im X, Re X]].
class HermitianVar {
 public:
  HermitianVar() = default;
  HermitianVar(const ConicProgram& p, int cone);

  int dim() const { return dim_; }
  int cone() const { return cone_; }
  LinearExpr re(int r, int c) const;
  LinearExpr im(int r, int c) const;
  // Re sum_{r,c} W(r,c) X(r,c), i.e. Re tr(W^T X).
  LinearExpr functional(const CMatrix& w) const;
  // <v|X|v>
  LinearExpr quadratic(const CVector& v) const;
  CMatrix value(const RVector& x) const;

 private:
  int cone_ = -1;
  int dim_ = 0;
  int offset_ = 0;
  int idx(int i, int j) const;
};

HermitianVar add_hermitian(ConicProgram& p, int dim);

RMatrix embed_hermitian(const CMatrix& x);
CMatrix unembed_hermitian(const RMatrix& y);

// Text serialization; see docs/standard_form.md.
std::string dump_standard_form(const ConicProgram& p);
ConicProgram parse_standard_form(const std::string& text);

}  // namespace qextrap::conic
