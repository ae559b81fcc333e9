#ifndef FRAISSE_ERRORS_HPP
#define FRAISSE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fraisse {

/// Malformed input: wrong shapes, unknown or duplicate labels, dangling references.
class StructuralError : public std::invalid_argument {
 public:
  explicit StructuralError(const std::string& what) : std::invalid_argument(what) {}
};

/// Well-formed input that violates an operation's mathematical precondition.
class PreconditionError : public std::domain_error {
 public:
  explicit PreconditionError(const std::string& what) : std::domain_error(what) {}
};

/// A construction produced an object that fails its own post-condition.
class InternalError : public std::logic_error {
 public:
  explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

/// JSON document that cannot be decoded; `path` points at the offending node.
class FormatError : public std::invalid_argument {
 public:
  FormatError(std::string path, const std::string& what)
      : std::invalid_argument(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace fraisse

#endif  // FRAISSE_ERRORS_HPP
