#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "minleaf/data.hpp"
#include "minleaf/tree.hpp"

namespace minleaf {

/// What the model (or the native search) maximizes.
enum class Objective {
  leaf_accuracy,      ///< minimum accuracy over non-empty leaves
  misclassification,  ///< number of correctly classified samples (OCT baseline)
};

std::string_view to_string(Objective objective);
Objective parse_objective(std::string_view text);

enum class VarKind { binary, continuous };
enum class Sense { le, eq, ge };

struct MioVariable {
  std::string name;
  VarKind kind = VarKind::continuous;
  double lower = 0.0;
  double upper = 1.0;

  bool operator==(const MioVariable&) const = default;
};

struct Term {
  std::size_t var = 0;  ///< index into MioModel::variables()
  double coef = 0.0;

  bool operator==(const Term&) const = default;
};

struct LinearConstraint {
  std::string id;
  std::vector<Term> terms;
  Sense sense = Sense::le;
  double rhs = 0.0;
};

struct MioMetadata {
  std::size_t n = 0;
  std::size_t p = 0;
  int k = 0;
  int depth = 0;
  std::size_t n_min = 0;
  Objective objective = Objective::leaf_accuracy;

  bool operator==(const MioMetadata&) const = default;
};

/// Generic maximization MILP: variables with bounds, linear constraints and a
/// linear objective. Names are unique; terms never repeat a variable.
class MioModel {
 public:
  std::size_t add_variable(std::string name, VarKind kind, double lower, double upper);
  /// Throws ModelError on a duplicate id, duplicate variable or non-finite coefficient.
  void add_constraint(LinearConstraint constraint);
  void set_objective(std::vector<Term> terms);

  const std::vector<MioVariable>& variables() const noexcept { return variables_; }
  const std::vector<LinearConstraint>& constraints() const noexcept { return constraints_; }
  const std::vector<Term>& objective() const noexcept { return objective_; }
  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t index(std::string_view name) const;  ///< throws ModelError when absent

  MioMetadata metadata;

  /// Same variables, constraints and objective irrespective of insertion
  /// order; metadata included.
  friend bool structurally_equal(const MioModel& a, const MioModel& b);

 private:
  std::vector<MioVariable> variables_;
  std::unordered_map<std::string, std::size_t> by_name_;
  std::vector<LinearConstraint> constraints_;
  std::unordered_map<std::string, std::size_t> constraint_ids_;
  std::vector<Term> objective_;
};

/// Canonical variable names (0-based indices, leaves numbered left to right).
namespace mio_names {
std::string z(std::size_t i, std::size_t t);
std::string s(std::size_t i, std::size_t t);
std::string S(std::size_t i, std::size_t t);
std::string r(std::size_t t);
std::string l(std::size_t t);
std::string c(int k, std::size_t t);
std::string a(std::size_t j, std::size_t m);
std::string b(std::size_t m);
inline constexpr const char* Q = "Q";
}  // namespace mio_names

/// Builds the depth-d tree-training model over `train`. For the leaf-accuracy
/// objective this maximizes Q subject to per-leaf accuracy bookkeeping
/// (s, S, r), leaf assignment (z), non-emptiness (l), leaf classes (c), split
/// selection (a, b) with epsilon-shifted left-branch constraints and the
/// N_min lower bound on non-empty leaves. The misclassification objective
/// replaces the accuracy bookkeeping by binary S with S <= z, S <= c_{y_i}
/// and maximizes the sum of S.
MioModel build_mio(const Dataset& train, const EpsilonVector& eps, int depth, std::size_t n_min, Objective objective);

/// CPLEX LP text. Constraints are emitted sorted by id and variables by name
/// (natural order), numbers in shortest round-trip form.
std::string emit_lp(const MioModel& model);
/// Reads the LP subset emitted by emit_lp (plus free-form whitespace and line
/// continuation). Throws ParseError with the offending line.
MioModel parse_lp(std::string_view text);

using Assignment = std::unordered_map<std::string, double>;

struct Violation {
  std::string id;  ///< constraint id, or "bound:<var>" / "integrality:<var>"
  double slack = 0.0;
};

struct FeasibilityTolerance {
  double constraint = 1e-6;
  double integrality = 1e-6;
};

struct FeasibilityReport {
  bool feasible = false;
  std::vector<Violation> violations;
  double objective = 0.0;
};

/// Evaluates every bound, integrality requirement and constraint. Throws
/// ModelError when the assignment lacks a model variable.
FeasibilityReport check_feasible(const MioModel& model, const Assignment& assignment,
                                 const FeasibilityTolerance& tol = {});

/// Encodes `tree` as a feasible point of `model`. The tree is embedded in the
/// complete topology: missing subtrees become branches on feature 0 with
/// threshold 0 (everything goes right), and thresholds are moved up to the
/// smallest training value at or above them so the epsilon-shifted left
/// constraints hold. Throws ModelError when a non-empty leaf has fewer than
/// N_min samples or the tree is deeper than the model.
Assignment warmstart_from_tree(const MioModel& model, const ShallowTree& tree, const Dataset& train);

/// Decodes a complete depth-d tree from a feasible assignment. Empty leaves
/// keep class 0; reduce_tree removes them. Throws ModelError when the
/// assignment is infeasible under `tol`.
ShallowTree extract_tree(const MioModel& model, const Assignment& assignment, const FeasibilityTolerance& tol = {
                                                                                    .constraint = 1e-6,
                                                                                    .integrality = 1e-4});

/// "name value" lines, '#' comments. Unknown names are reported in `warnings`
/// when a model is given.
Assignment parse_solution(std::istream& in, const MioModel* model = nullptr, std::vector<std::string>* warnings = nullptr);
Assignment load_solution(const std::filesystem::path& path, const MioModel* model = nullptr,
                         std::vector<std::string>* warnings = nullptr);
/// Writes the assignment sorted by variable name, shortest round-trip values.
void write_solution(std::ostream& out, const Assignment& assignment);

/// Orders "a_10_2" after "a_9_2": digit runs compare numerically.
bool natural_less(std::string_view a, std::string_view b);

}  // namespace minleaf
