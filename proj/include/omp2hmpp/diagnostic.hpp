#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace omp2hmpp {

struct Diagnostic {
    std::string file;
    int line = 0;
    int col = 0;
    std::string message;

    /// `file:line:col: message`, the format written to standard error.
    std::string str() const;
};

/// Raised by every pipeline stage on a user-facing error. Carries one or more
/// located diagnostics.
class CompileError : public std::runtime_error {
  public:
    explicit CompileError(Diagnostic d);
    explicit CompileError(std::vector<Diagnostic> ds);

    const std::vector<Diagnostic>& diagnostics() const { return diags_; }

  private:
    std::vector<Diagnostic> diags_;
};

[[noreturn]] void fail(int line, int col, const std::string& message);

} // namespace omp2hmpp
