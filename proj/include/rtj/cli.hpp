#ifndef RTJ_CLI_HPP
#define RTJ_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace rtj {

// Full command-line entry point (subcommands `run` and `gen`). Returns the
// process exit code: 0 ok, 1 usage or data error, 2 verification failure.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err);

}  // namespace rtj

#endif
