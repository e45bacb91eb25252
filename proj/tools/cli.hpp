#pragma once

#include <iosfwd>

namespace hipyr::cli {

/// Runs one `hipyr` invocation. Returns 0 on success, 1 on a runtime failure
/// (one-line diagnostic on `err`), 2 on a usage error.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hipyr::cli
