#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace mmg {

enum class TailKind { kConstant, kLinear };

// Piecewise-linear representation: breakpoints (s, F(s)) sorted by s, first
// at s = 0, linearly interpolated, then a constant or linear tail.
struct PwlRep {
  std::vector<std::pair<double, double>> breakpoints;
  TailKind tail = TailKind::kConstant;
  double slope = 0.0;  // tail slope when kLinear
};

enum class BuiltinKind { kRatio, kChordal, kSquare, kOscillating };

struct AnalyticRep {
  BuiltinKind kind;
  double param = 0.0;  // radius for chordal
};

// Candidate metric preserving function on [0, +inf), evaluable everywhere.
class MPFunction {
 public:
  double operator()(double s) const;
  double sup() const;  // may be +inf
  bool is_nondecreasing() const;
  bool is_increasing() const;
  const std::string& name() const { return name_; }
  const PwlRep* pwl() const { return std::get_if<PwlRep>(&rep_); }
  const AnalyticRep* analytic() const { return std::get_if<AnalyticRep>(&rep_); }
  bool is_composed() const;

  static MPFunction from_pwl(PwlRep rep, std::string name = "pwl");
  static MPFunction identity();
  static MPFunction ratio();             // s / (1 + s)
  static MPFunction cap(double c);       // min(s, c)
  static MPFunction chordal(double r);   // 2r sin(s/2r), capped at 2r
  static MPFunction square();            // s^2, not metric preserving
  static MPFunction hump();          // s, then 4 - s, then 1
  static MPFunction ripple();          // s, then (1+s+sin^2(s-1))/2s
  static MPFunction fn1(int n);
  static MPFunction fn2(int n);
  static MPFunction fn3(int n);
  static MPFunction compose(MPFunction outer, MPFunction inner);

  static MPFunction from_json(const std::string& text);
  std::string to_json() const;
  // catalog lookup: "identity", "ratio", "cap:<c>", "chordal:<r>",
  // "square", "hump", "ripple", "fn1:<n>", "fn2:<n>", "fn3:<n>"
  static MPFunction builtin(const std::string& spec);

 private:
  struct ComposedRep {
    std::shared_ptr<const MPFunction> outer, inner;
  };
  std::variant<PwlRep, AnalyticRep, ComposedRep> rep_;
  std::string name_;
};

// n-indexed family F_n with its candidate limit F.
struct MPFamily {
  std::function<MPFunction(int)> generator;
  MPFunction limit;
  std::vector<int> indices{1, 2, 5, 10, 20, 50, 100};
  std::string name;
};

MPFamily builtin_family(const std::string& name);
// chordal family F_n(s) = 2 r(n) sin(s / 2 r(n)) capped, limit identity
MPFamily chordal_family(std::function<double(int)> radius_of_n,
                        std::string name = "chordal");

struct GridSpec {
  double s_max = 10.0;
  int points = 2001;
};

enum class Verdict { kHolds, kFails, kInconclusive };

struct ConditionVerdict {
  Verdict state = Verdict::kInconclusive;
  bool exact = false;  // decided from the representation, not sampled
  double witness_s = std::numeric_limits<double>::quiet_NaN();
  double witness_value = std::numeric_limits<double>::quiet_NaN();
  std::string evidence;
};

// Classification of a single function / a family against the conditions of
// the transfer theorems. Numerical entries are evidence, not proof; the
// implications (i) => (ii) => (b) => (iii) hold in every emitted report.
struct ConditionReport {
  // single-function facts
  ConditionVerdict zero_at_zero;
  ConditionVerdict positive_off_zero;
  ConditionVerdict subadditive;
  ConditionVerdict nondecreasing;
  ConditionVerdict increasing;
  ConditionVerdict lipschitz_bound_spot;  // |F(s)-F(t)| <= F(|s-t|) spot checks
  ConditionVerdict doubling_spot;         // F(s) <= 2F(t) when s <= 2t
  bool metric_preserving = false;
  // family conditions
  ConditionVerdict a;    // pointwise convergence F_n -> F
  ConditionVerdict b;    // I_{F_n}(s) -> 0
  ConditionVerdict c;    // limsup sup F_n <= sup F
  ConditionVerdict d;    // F increasing
  ConditionVerdict i;    // all F_n nondecreasing
  ConditionVerdict ii;   // sup_s I_{F_n} -> 0
  ConditionVerdict iii;  // F nondecreasing
  std::vector<std::string> notes;
};

// Checks F(0) = 0, positivity off 0 and subadditivity: exact on breakpoint
// corner combinations for piecewise-linear, on the grid for analytic
// builtins. Also records the necessary-condition spot checks.
ConditionReport validate_mpf(const MPFunction& F, const GridSpec& grid = {});

// I_F(s) = F(s) - inf over [s, +inf) of F; exact for piecewise-linear.
double monotone_defect(const MPFunction& F, double s);

// Exact for piecewise-linear; +inf tail handled via the representation.
double sup_monotone_defect(const MPFunction& F, const GridSpec& grid = {});

struct ClassifySpec {
  GridSpec grid;
  double tol = 1e-3;
};

ConditionReport classify_family(const MPFamily& fam,
                                const ClassifySpec& spec = {});

struct ProbePair {
  std::function<double(int)> sn;
  double s = 0.0;
  std::string label;
};

struct ProbeReport {
  struct Row {
    std::string label;
    std::vector<double> value_gap;  // |F_n(s_n) - F(s)|
    std::vector<double> arg_gap;    // |s_n - s|
    Verdict values_converge = Verdict::kInconclusive;
    Verdict args_converge = Verdict::kInconclusive;
  };
  std::vector<int> indices;
  std::vector<Row> rows;
};

ProbeReport pointwise_limit_probe(const MPFamily& fam,
                                  const std::vector<ProbePair>& pairs);

const char* verdict_name(Verdict v);
std::string condition_report_to_json(const ConditionReport& r);

}  // namespace mmg
