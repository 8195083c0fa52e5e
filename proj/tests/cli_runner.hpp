#pragma once

// Runs the pdn executable in a shell and captures its output.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

struct CliResult {
    int status = -1;
    std::string out;
    std::string err;
};

inline CliResult run_cli(const std::string& args, const std::filesystem::path& scratch) {
    const auto out_path = scratch / "stdout.txt";
    const auto err_path = scratch / "stderr.txt";
    const std::string command = std::string("'") + PDN_CLI + "' " + args + " >'" + out_path.string() + "' 2>'" +
                                err_path.string() + "'";
    const int raw = std::system(command.c_str());
    CliResult r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    const auto read = [](const std::filesystem::path& p) {
        std::ifstream in(p);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    };
    r.out = read(out_path);
    r.err = read(err_path);
    return r;
}
