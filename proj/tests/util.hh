#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

inline std::string protocol_path(const std::string& name) {
    return std::string(MPST_PROTOCOLS) + "/" + name;
}

inline std::string read_protocol(const std::string& name) {
    std::ifstream in(protocol_path(name));
    if (!in) throw std::runtime_error("cannot open " + name);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}
