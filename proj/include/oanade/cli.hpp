#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace oanade {

// Flat `key = value` lines; `#` starts a comment. Later keys override earlier ones.
std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path);

// Entry point of the `oanade` command line tool. args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace oanade
