#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hppl/lang/ast.hpp"

namespace hppl {

/// Constant values supplied outside the source (`--set N=100`). They take
/// precedence over `const` declarations and may introduce new constants.
using ConstOverrides = std::map<std::string, long long>;

struct ValidationError {
  StmtId stmt = 0;
  SourceLoc loc;
  std::string rule;
  std::string message;

  friend bool operator==(const ValidationError&, const ValidationError&) = default;
};

/// A validated program: ids assigned, affine flags set, constants resolved.
/// Copies share the immutable syntax tree.
class CheckedProgram {
 public:
  CheckedProgram(Program program, std::map<std::string, long long> constants,
                 std::vector<std::string> notes);

  const Program& program() const { return *ast_; }
  const Block& body() const { return ast_->body; }
  const std::map<std::string, long long>& constants() const { return constants_; }
  /// Informational findings that are not errors (e.g. non-affine means).
  const std::vector<std::string>& notes() const { return notes_; }

  std::size_t stmt_count() const { return by_id_.size() - 1; }
  const Stmt& stmt(StmtId id) const { return *by_id_.at(static_cast<std::size_t>(id)); }
  /// The Sample statement at `id`, or nullptr if `id` is another kind.
  const SampleStmt* sample(StmtId id) const;

  /// Ids of every Sample statement carrying the given annotation, in order.
  std::vector<StmtId> annotated(Annotation ann) const;

 private:
  std::shared_ptr<const Program> ast_;
  std::vector<const Stmt*> by_id_;
  std::map<std::string, long long> constants_;
  std::vector<std::string> notes_;
};

struct ValidationResult {
  std::optional<CheckedProgram> checked;
  std::vector<ValidationError> errors;

  bool ok() const { return errors.empty(); }
};

/// Checks scoping, annotation placement, distribution-parameter rules and
/// observation rules. On success `checked` is set; otherwise `errors` lists
/// one entry per violation. Deterministic and side-effect free.
ValidationResult validate(const Program& p, const ConstOverrides& overrides = {});

/// Parses then validates; throws ParseError, or std::invalid_argument
/// carrying the first validation error.
CheckedProgram load_checked(std::string_view text, const ConstOverrides& overrides = {});

}  // namespace hppl
