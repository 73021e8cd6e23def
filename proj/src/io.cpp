#include "malleate/io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace malleate {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

JointDistribution joint_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid JSON: ") + e.what());
  }
  try {
    if (!doc.contains("alphabet_x") || !doc.contains("alphabet_y") || !doc.contains("pxy")) {
      throw ValidationError("JSON input requires alphabet_x, alphabet_y and pxy fields");
    }
    Alphabet ax(doc.at("alphabet_x").get<std::vector<std::string>>());
    Alphabet ay(doc.at("alphabet_y").get<std::vector<std::string>>());
    const auto& rows = doc.at("pxy");
    if (!rows.is_array() || static_cast<int>(rows.size()) != ax.size()) {
      throw ValidationError("pxy must be an array with one row per X symbol");
    }
    Eigen::MatrixXd p(ax.size(), ay.size());
    for (int i = 0; i < ax.size(); ++i) {
      const auto& row = rows.at(static_cast<std::size_t>(i));
      if (!row.is_array() || static_cast<int>(row.size()) != ay.size()) {
        throw ValidationError("pxy row " + std::to_string(i) +
                              " must have one entry per Y symbol");
      }
      for (int j = 0; j < ay.size(); ++j) {
        p(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
      }
    }
    const double base = doc.value("log_base", 2.0);
    return {std::move(ax), std::move(ay), std::move(p), base};
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed JSON input: ") + e.what());
  }
}

std::string joint_to_json(const JointDistribution& d) {
  nlohmann::ordered_json doc;
  doc["alphabet_x"] = d.alphabet_x().symbols();
  doc["alphabet_y"] = d.alphabet_y().symbols();
  auto rows = nlohmann::ordered_json::array();
  for (int i = 0; i < d.size_x(); ++i) {
    auto row = nlohmann::ordered_json::array();
    for (int j = 0; j < d.size_y(); ++j) row.push_back(d.pxy()(i, j));
    rows.push_back(std::move(row));
  }
  doc["pxy"] = std::move(rows);
  doc["log_base"] = d.log_base();
  return doc.dump(2);
}

JointDistribution joint_from_csv(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  std::vector<std::vector<std::string>> table;
  while (std::getline(ss, line)) {
    if (trim(line).empty()) continue;
    table.push_back(split_csv_line(line));
  }
  if (table.size() < 2) {
    throw ValidationError("CSV input needs a header row of Y labels and at least one data row");
  }
  const auto& header = table.front();
  if (header.size() < 2) {
    throw ValidationError("CSV header must list at least one Y label after the corner cell");
  }
  std::vector<std::string> y_labels(header.begin() + 1, header.end());
  std::vector<std::string> x_labels;
  Eigen::MatrixXd p(static_cast<int>(table.size()) - 1, static_cast<int>(y_labels.size()));
  for (std::size_t r = 1; r < table.size(); ++r) {
    const auto& row = table[r];
    if (row.size() != header.size()) {
      throw ValidationError("CSV row " + std::to_string(r + 1) + " has " +
                            std::to_string(row.size()) + " cells, expected " +
                            std::to_string(header.size()));
    }
    x_labels.push_back(row[0]);
    for (std::size_t c = 1; c < row.size(); ++c) {
      try {
        std::size_t pos = 0;
        p(static_cast<int>(r) - 1, static_cast<int>(c) - 1) = std::stod(row[c], &pos);
        if (pos != row[c].size()) throw std::invalid_argument(row[c]);
      } catch (const std::exception&) {
        throw ValidationError("CSV cell \"" + row[c] + "\" at row " + std::to_string(r + 1) +
                              " is not a number");
      }
    }
  }
  return {Alphabet(std::move(x_labels)), Alphabet(std::move(y_labels)), std::move(p)};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open input file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

JointDistribution load_joint(const std::string& path) {
  const auto dot = path.find_last_of('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  if (ext == "json") return joint_from_json(read_file(path));
  if (ext == "csv") return joint_from_csv(read_file(path));
  throw ValidationError("unrecognized input extension \"" + ext + "\" (expected .json or .csv)");
}

}  // namespace malleate
