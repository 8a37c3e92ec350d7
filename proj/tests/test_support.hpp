#pragma once

#include "prokno/pk_model.hpp"

#include <fstream>
#include <sstream>
#include <string>

namespace prokno::testing {

inline std::string data_path(const std::string& rel) { return std::string(PROKNO_DATA_DIR) + "/" + rel; }

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline Json read_json(const std::string& rel) { return Json::parse(read_file(data_path(rel))); }

inline ProcessKnowledgeDoc toy_flow() { return load_pk_file(data_path("pk/toy_flow.pk.json")); }
inline ProcessKnowledgeDoc toy_flat() { return load_pk_file(data_path("pk/toy_flat.pk.json")); }
inline ProcessKnowledgeDoc food_prefs() { return load_pk_file(data_path("pk/food_prefs.pk.json")); }

}  // namespace prokno::testing
