#pragma once

#include <iosfwd>

namespace wcps {

/// Exit status: 0 ok, 1 certification or runtime failure, 2 bad usage.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wcps
