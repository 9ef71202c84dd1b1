#pragma once

#include <fstream>
#include <sstream>
#include <string>

inline std::string data_path(const std::string& name) { return std::string(OMP2HMPP_TEST_DATA) + "/" + name; }

inline std::string read_data(const std::string& name)
{
    std::ifstream in(data_path(name));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <unistd.h>

// Host compiler round trip: stdio.h and math.h prepended, stdout captured.
// C++ mode for sources still carrying reference parameters.
inline std::optional<std::string> run_host_program(const std::string& source, bool cxx = false)
{
    static std::atomic<int> counter{0};
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() /
                   ("omp2hmpp_t" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(dir);
    fs::path src = dir / (cxx ? "p.cpp" : "p.c");
    {
        std::ofstream out(src);
        out << "#include <stdio.h>\n#include <math.h>\n" << source;
    }
    std::string cmd = std::string(cxx ? "c++" : "cc -std=c99") + " -w -O1 -o " + (dir / "p").string() + " " +
                      src.string() + " -lm 2>" + (dir / "err").string();
    std::optional<std::string> result;
    if (std::system(cmd.c_str()) == 0) {
        if (FILE* p = ::popen((dir / "p").string().c_str(), "r")) {
            std::string out;
            char buf[4096];
            std::size_t n;
            while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
            // exit status is the program's business (Table 9 returns l)
            ::pclose(p);
            result = out;
        }
    }
    fs::remove_all(dir);
    return result;
}
