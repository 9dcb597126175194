#ifndef VSR_CLI_HPP
#define VSR_CLI_HPP

#include <string>
#include <vector>

namespace vsr {

// Full command-line surface (synth / train / decode / reconstruct / augment /
// g2p / score / lm-train). Returns the process exit code: 0 success, 1
// runtime failure (diagnostic on stderr), 2 usage error.
int run_cli(const std::vector<std::string>& args);

}  // namespace vsr

#endif  // VSR_CLI_HPP
