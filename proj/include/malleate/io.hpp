#pragma once

#include <iosfwd>
#include <string>

#include "malleate/joint_distribution.hpp"

namespace malleate {

// JSON form:
//   {"alphabet_x": ["0","1"], "alphabet_y": ["0","1"],
//    "pxy": [[0.445,0.055],[0.055,0.445]], "log_base": 2}
// pxy is row-major (one inner array per X symbol); log_base is optional and
// defaults to 2.
JointDistribution joint_from_json(const std::string& text);
std::string joint_to_json(const JointDistribution& d);

// CSV form: header row carries the Y labels (first cell ignored), each data
// row starts with an X label followed by p(x,y) values.  Labels are trimmed
// of surrounding whitespace; quoting is not supported.  log_base defaults
// to 2 (the format has no field for it).
JointDistribution joint_from_csv(const std::string& text);

// Dispatch on filename extension (.json / .csv); errors otherwise.
JointDistribution load_joint(const std::string& path);

std::string read_file(const std::string& path);

}  // namespace malleate
