#pragma once

namespace graphmix {

// Command-line entry point (see README / --help for flags). Returns the
// process exit code.
int cli_main(int argc, const char* const* argv);

}  // namespace graphmix
