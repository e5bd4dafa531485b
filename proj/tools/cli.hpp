#pragma once

#include <iosfwd>

namespace evn::cli {

/// Entry point behind the evn binary. Exit codes: 0 success, 1 operational
/// error, 2 usage error.
int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace evn::cli
