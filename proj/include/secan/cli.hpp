// Command-line front end; see README for the commands and exit codes.
#pragma once

namespace secan {

int run_cli(int argc, const char* const* argv);

}  // namespace secan
