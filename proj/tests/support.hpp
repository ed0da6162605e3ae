#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "ctcmbqc/qmath.hpp"

namespace testing {

inline std::string data_path(const std::string &name) { return std::string(CTCMBQC_DATA_DIR) + "/" + name; }

inline std::string read_data(const std::string &name) {
    std::ifstream in(data_path(name));
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline constexpr int kSeeds[] = {0, 1, 2};

}  // namespace testing
