#include "qextrap/conic.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <sstream>

#include "qextrap/error.hpp"

namespace qextrap::conic {

LinearExpr LinearExpr::variable(int var, double coef) {
  LinearExpr e;
  e.add(var, coef);
  return e;
}

LinearExpr& LinearExpr::add(int var, double coef) {
  if (coef != 0.0) terms_.push_back({var, coef});
  return *this;
}

LinearExpr& LinearExpr::operator+=(const LinearExpr& o) {
  terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
  constant_ += o.constant_;
  return *this;
}

LinearExpr& LinearExpr::operator-=(const LinearExpr& o) {
  for (const auto& t : o.terms_) terms_.push_back({t.var, -t.coef});
  constant_ -= o.constant_;
  return *this;
}

LinearExpr& LinearExpr::operator*=(double s) {
  for (auto& t : terms_) t.coef *= s;
  constant_ *= s;
  return *this;
}

LinearExpr& LinearExpr::normalize() {
  std::sort(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
  std::vector<Term> out;
  out.reserve(terms_.size());
  for (const auto& t : terms_) {
    if (!out.empty() && out.back().var == t.var) out.back().coef += t.coef;
    else out.push_back(t);
  }
  std::erase_if(out, [](const Term& t) { return t.coef == 0.0; });
  terms_ = std::move(out);
  return *this;
}

double LinearExpr::evaluate(const RVector& x) const {
  double v = constant_;
  for (const auto& t : terms_) v += t.coef * x(t.var);
  return v;
}

LinearExpr operator+(LinearExpr a, const LinearExpr& b) { return a += b; }
LinearExpr operator-(LinearExpr a, const LinearExpr& b) { return a -= b; }
LinearExpr operator*(double s, LinearExpr a) { return a *= s; }

int ConicProgram::add_free(int count) {
  cones_.push_back({ConeKind::Free, count, num_vars_});
  num_vars_ += count;
  return num_vars_ - count;
}

int ConicProgram::add_nonnegative(int count) {
  cones_.push_back({ConeKind::NonNegative, count, num_vars_});
  num_vars_ += count;
  return num_vars_ - count;
}

int ConicProgram::add_psd(int order) {
  if (order < 1) throw PreconditionError("PSD block order must be positive");
  cones_.push_back({ConeKind::PSD, order, num_vars_});
  num_vars_ += cones_.back().num_vars();
  return static_cast<int>(cones_.size()) - 1;
}

int ConicProgram::psd_entry(int cone, int i, int j) const {
  const auto& c = cones_.at(cone);
  if (c.kind != ConeKind::PSD) throw PreconditionError("cone is not PSD");
  if (i > j) std::swap(i, j);
  if (i < 0 || j >= c.size) throw PreconditionError("PSD entry out of range");
  return c.offset + i * c.size - i * (i - 1) / 2 + (j - i);
}

void ConicProgram::add_constraint(LinearExpr e, Relation rel, double rhs) {
  e.normalize();
  for (const auto& t : e.terms())
    if (t.var < 0 || t.var >= num_vars_) throw PreconditionError("constraint references unknown variable");
  constraints_.push_back({e.terms(), rel, rhs - e.constant()});
}

void ConicProgram::set_objective(Sense s, LinearExpr e) {
  e.normalize();
  sense_ = s;
  objective_ = e.terms();
  objective_constant_ = e.constant();
}

RMatrix psd_value(const ConicProgram& p, int cone, const RVector& x) {
  const int n = p.cone(cone).size;
  RMatrix y(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) y(i, j) = y(j, i) = x(p.psd_entry(cone, i, j));
  return y;
}

HermitianVar::HermitianVar(const ConicProgram& p, int cone)
    : cone_(cone), dim_(p.cone(cone).size / 2), offset_(p.cone(cone).offset) {
  if (p.cone(cone).kind != ConeKind::PSD || p.cone(cone).size % 2)
    throw PreconditionError("Hermitian variable needs an even PSD block");
}

int HermitianVar::idx(int i, int j) const {
  if (i > j) std::swap(i, j);
  const int n = 2 * dim_;
  return offset_ + i * n - i * (i - 1) / 2 + (j - i);
}

LinearExpr HermitianVar::re(int r, int c) const {
  LinearExpr e;
  e.add(idx(r, c), 0.5).add(idx(dim_ + r, dim_ + c), 0.5);
  return e;
}

LinearExpr HermitianVar::im(int r, int c) const {
  LinearExpr e;
  if (r == c) return e;
  e.add(idx(dim_ + r, c), 0.5).add(idx(dim_ + c, r), -0.5);
  return e;
}

LinearExpr HermitianVar::functional(const CMatrix& w) const {
  LinearExpr e;
  for (int r = 0; r < dim_; ++r)
    for (int c = 0; c < dim_; ++c) {
      const double wr = w(r, c).real(), wi = w(r, c).imag();
      if (wr != 0.0) e.add(idx(r, c), 0.5 * wr).add(idx(dim_ + r, dim_ + c), 0.5 * wr);
      if (wi != 0.0 && r != c) e.add(idx(dim_ + r, c), -0.5 * wi).add(idx(dim_ + c, r), 0.5 * wi);
    }
  e.normalize();
  return e;
}

LinearExpr HermitianVar::quadratic(const CVector& v) const {
  return functional(v.conjugate() * v.transpose());
}

CMatrix HermitianVar::value(const RVector& x) const {
  const int n = 2 * dim_;
  RMatrix y(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) y(i, j) = y(j, i) = x(idx(i, j));
  return unembed_hermitian(y);
}

HermitianVar add_hermitian(ConicProgram& p, int dim) { return HermitianVar(p, p.add_psd(2 * dim)); }

RMatrix embed_hermitian(const CMatrix& x) {
  const auto d = x.rows();
  RMatrix y(2 * d, 2 * d);
  y << x.real(), -x.imag(), x.imag(), x.real();
  return y;
}

CMatrix unembed_hermitian(const RMatrix& y) {
  const auto d = y.rows() / 2;
  RMatrix a = y.topLeftCorner(d, d), b = y.bottomLeftCorner(d, d), c = y.bottomRightCorner(d, d);
  CMatrix x(d, d);
  x.real() = 0.5 * (a + c);
  x.imag() = 0.5 * (b - b.transpose());
  return x;
}

// Format:
//   qextrap-conic 1
//   sense min|max
//   cones K            then K lines "free n" | "nonneg n" | "psd n"
//   objective C NNZ    then NNZ lines "var coef"
//   constraints M      then per constraint "eq|le|ge RHS NNZ" and NNZ lines "var coef"
//   end
// Reals are printed with 17 significant digits; terms are sorted by variable.
namespace {
std::string num(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, p);
}

const char* rel_name(Relation r) {
  switch (r) {
    case Relation::Equal: return "eq";
    case Relation::LessEqual: return "le";
    default: return "ge";
  }
}

void write_terms(std::ostringstream& os, const std::vector<Term>& terms) {
  for (const auto& t : terms) os << t.var << ' ' << num(t.coef) << '\n';
}
}  // namespace

std::string dump_standard_form(const ConicProgram& p) {
  std::ostringstream os;
  os << "qextrap-conic 1\n";
  os << "sense " << (p.sense() == Sense::Minimize ? "min" : "max") << '\n';
  os << "cones " << p.cones().size() << '\n';
  for (const auto& c : p.cones())
    os << (c.kind == ConeKind::Free ? "free " : c.kind == ConeKind::NonNegative ? "nonneg " : "psd ")
       << c.size << '\n';
  os << "objective " << num(p.objective_constant()) << ' ' << p.objective().size() << '\n';
  write_terms(os, p.objective());
  os << "constraints " << p.constraints().size() << '\n';
  for (const auto& c : p.constraints()) {
    os << rel_name(c.relation) << ' ' << num(c.rhs) << ' ' << c.terms.size() << '\n';
    write_terms(os, c.terms);
  }
  os << "end\n";
  return os.str();
}

ConicProgram parse_standard_form(const std::string& text) {
  std::istringstream is(text);
  auto fail = [](const std::string& what) -> ConicProgram {
    throw ValidationError({"standard form: " + what});
  };
  std::string tok;
  int version = 0;
  if (!(is >> tok >> version) || tok != "qextrap-conic" || version != 1) return fail("bad header");
  ConicProgram p;
  std::string sense;
  if (!(is >> tok >> sense) || tok != "sense" || (sense != "min" && sense != "max"))
    return fail("bad sense line");
  std::size_t count = 0;
  if (!(is >> tok >> count) || tok != "cones") return fail("bad cones line");
  for (std::size_t k = 0; k < count; ++k) {
    int n = 0;
    if (!(is >> tok >> n) || n < 1) return fail("bad cone entry");
    if (tok == "free") p.add_free(n);
    else if (tok == "nonneg") p.add_nonnegative(n);
    else if (tok == "psd") p.add_psd(n);
    else return fail("unknown cone kind " + tok);
  }
  auto read_terms = [&](std::size_t nnz) {
    LinearExpr e;
    for (std::size_t k = 0; k < nnz; ++k) {
      int var = 0;
      double coef = 0;
      if (!(is >> var >> coef)) fail("truncated term list");
      e.add(var, coef);
    }
    return e;
  };
  double constant = 0;
  if (!(is >> tok >> constant >> count) || tok != "objective") return fail("bad objective line");
  LinearExpr obj = read_terms(count);
  obj += constant;
  p.set_objective(sense == "min" ? Sense::Minimize : Sense::Maximize, obj);
  if (!(is >> tok >> count) || tok != "constraints") return fail("bad constraints line");
  for (std::size_t k = 0; k < count; ++k) {
    double rhs = 0;
    std::size_t nnz = 0;
    if (!(is >> tok >> rhs >> nnz)) return fail("bad constraint header");
    Relation rel = tok == "eq" ? Relation::Equal : tok == "le" ? Relation::LessEqual : Relation::GreaterEqual;
    if (tok != "eq" && tok != "le" && tok != "ge") return fail("unknown relation " + tok);
    p.add_constraint(read_terms(nnz), rel, rhs);
  }
  if (!(is >> tok) || tok != "end") return fail("missing end marker");
  return p;
}

}  // namespace qextrap::conic
