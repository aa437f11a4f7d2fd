#pragma once

#include <ostream>

namespace provkernel::cli {

// Exit codes: 0 success, 1 domain error or failed validation, 2 usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace provkernel::cli
