// Copyright 2026 The ebus-dispatch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "ebus/milp.hpp"

namespace ebus {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kNameWidth = 8;

std::string number(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("cannot format number");
  return std::string(buf, end);
}

double parse_number(const std::string& token) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && token[0] == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw std::runtime_error("MPS: bad number '" + token + "'");
  }
  return v;
}

std::string pad(const std::string& s, std::size_t width = kNameWidth) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

bool fits(const std::string& name) {
  return !name.empty() && name.size() <= kNameWidth &&
         name.find_first_of(" \t") == std::string::npos;
}

std::string fixed_digits(int value, int width) {
  std::string digits = std::to_string(value);
  if (static_cast<int>(digits.size()) < width) {
    digits.insert(0, width - digits.size(), '0');
  }
  return digits;
}

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

}  // namespace

MpsExport export_mps(const MilpProblem& prob) {
  const int m = prob.num_rows();
  const int n = prob.num_cols();

  std::vector<std::string> row_long(m);
  std::vector<std::string> col_long(n);
  for (int r = 0; r < m; ++r) {
    row_long[r] = r < static_cast<int>(prob.row_names.size())
                      ? prob.row_names[r]
                      : "R" + std::to_string(r);
  }
  for (int j = 0; j < n; ++j) {
    col_long[j] = j < static_cast<int>(prob.col_names.size())
                      ? prob.col_names[j]
                      : "C" + std::to_string(j);
  }

  bool overflow = false;
  for (const std::string& s : row_long) overflow = overflow || !fits(s);
  for (const std::string& s : col_long) overflow = overflow || !fits(s);

  std::vector<std::string> row_name = row_long;
  std::vector<std::string> col_name = col_long;
  MpsExport out;
  if (overflow) {
    // Family/kind prefix plus a per-prefix counter.
    std::unordered_map<std::string, int> counter;
    std::ostringstream map;
    for (int r = 0; r < m; ++r) {
      std::string prefix =
          r < static_cast<int>(prob.row_tags.size())
              ? std::string(tag_label(prob.row_tags[r]))
              : std::string("R");
      const int width = static_cast<int>(kNameWidth - prefix.size());
      row_name[r] = prefix + fixed_digits(counter[prefix]++, width);
      map << row_name[r] << ' ' << row_long[r] << '\n';
    }
    counter.clear();
    for (int j = 0; j < n; ++j) {
      const std::string prefix = col_long[j].substr(0, 1);
      col_name[j] = prefix + fixed_digits(counter[prefix]++, kNameWidth - 1);
      map << col_name[j] << ' ' << col_long[j] << '\n';
    }
    out.name_map = map.str();
  }

  const Eigen::SparseMatrix<double, Eigen::ColMajor> csc = prob.matrix;
  std::ostringstream os;
  os << "NAME          EBUS\n";
  os << "ROWS\n";
  os << " N  COST\n";
  for (int r = 0; r < m; ++r) {
    const char* sense = prob.senses[r] == Sense::kLessEqual ? "L"
                        : prob.senses[r] == Sense::kEqual   ? "E"
                                                            : "G";
    os << ' ' << sense << "  " << row_name[r] << '\n';
  }

  os << "COLUMNS\n";
  bool in_integer_block = false;
  int marker = 0;
  for (int j = 0; j < n; ++j) {
    const bool is_int = prob.integer[j];
    if (is_int != in_integer_block) {
      os << "    " << pad("M" + fixed_digits(marker++, 7))
         << "  'MARKER'                 "
         << (is_int ? "'INTORG'" : "'INTEND'") << '\n';
      in_integer_block = is_int;
    }
    bool wrote = false;
    if (prob.objective[j] != 0.0) {
      os << "    " << pad(col_name[j]) << "  " << pad("COST") << "  "
         << number(prob.objective[j]) << '\n';
      wrote = true;
    }
    for (Eigen::SparseMatrix<double>::InnerIterator it(csc, j); it; ++it) {
      os << "    " << pad(col_name[j]) << "  " << pad(row_name[it.row()])
         << "  " << number(it.value()) << '\n';
      wrote = true;
    }
    if (!wrote) {
      os << "    " << pad(col_name[j]) << "  " << pad("COST") << "  0\n";
    }
  }
  if (in_integer_block) {
    os << "    " << pad("M" + fixed_digits(marker++, 7))
       << "  'MARKER'                 'INTEND'\n";
  }

  os << "RHS\n";
  for (int r = 0; r < m; ++r) {
    if (prob.rhs[r] != 0.0) {
      os << "    " << pad("RHS") << "  " << pad(row_name[r]) << "  "
         << number(prob.rhs[r]) << '\n';
    }
  }

  os << "BOUNDS\n";
  auto bound = [&](const char* type, int j, const double* value) {
    os << ' ' << type << ' ' << pad("BND") << "  " << pad(col_name[j]);
    if (value != nullptr) os << "  " << number(*value);
    os << '\n';
  };
  for (int j = 0; j < n; ++j) {
    const double lo = prob.lower[j];
    const double up = prob.upper[j];
    if (lo == up) {
      bound("FX", j, &lo);
      continue;
    }
    if (std::isinf(lo) && std::isinf(up)) {
      bound("FR", j, nullptr);
      continue;
    }
    if (std::isinf(lo)) {
      bound("MI", j, nullptr);
    } else if (lo != 0.0) {
      bound("LO", j, &lo);
    }
    if (!std::isinf(up)) {
      bound("UP", j, &up);
    } else if (prob.integer[j]) {
      bound("PL", j, nullptr);
    }
  }
  os << "ENDATA\n";
  out.text = os.str();
  return out;
}

MilpProblem parse_mps(const std::string& text, const std::string& name_map) {
  std::unordered_map<std::string, std::string> long_name;
  {
    std::istringstream is(name_map);
    std::string line;
    while (std::getline(is, line)) {
      const auto toks = tokenize(line);
      if (toks.size() == 2) long_name[toks[0]] = toks[1];
    }
  }
  auto resolve = [&](const std::string& s) {
    auto it = long_name.find(s);
    return it == long_name.end() ? s : it->second;
  };

  enum class Section { kNone, kRows, kColumns, kRhs, kBounds, kDone };
  Section section = Section::kNone;

  std::string objective_row;
  std::unordered_map<std::string, int> row_of;
  std::unordered_map<std::string, int> col_of;
  std::vector<std::string> row_names;
  std::vector<std::string> col_names;
  std::vector<Sense> senses;
  std::vector<double> rhs;
  std::vector<Eigen::Triplet<double>> entries;
  std::vector<double> objective;
  std::vector<bool> integer;
  std::vector<double> lower;
  std::vector<double> upper;
  bool integer_block = false;

  auto column = [&](const std::string& name) {
    auto [it, inserted] =
        col_of.emplace(name, static_cast<int>(col_names.size()));
    if (inserted) {
      col_names.push_back(name);
      objective.push_back(0.0);
      integer.push_back(integer_block);
      lower.push_back(0.0);
      upper.push_back(kInf);
    }
    return it->second;
  };
  auto row = [&](const std::string& name) {
    auto it = row_of.find(name);
    if (it == row_of.end()) {
      throw std::runtime_error("MPS: unknown row '" + name + "'");
    }
    return it->second;
  };
  auto add_entry = [&](int col, const std::string& row_name, double value) {
    if (row_name == objective_row) {
      objective[col] = value;
    } else {
      entries.emplace_back(row(row_name), col, value);
    }
  };

  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '*') continue;
    const auto toks = tokenize(line);
    if (toks.empty()) continue;
    if (line[0] != ' ' && line[0] != '\t') {
      const std::string& head = toks[0];
      if (head == "NAME") {
        section = Section::kNone;
      } else if (head == "ROWS") {
        section = Section::kRows;
      } else if (head == "COLUMNS") {
        section = Section::kColumns;
      } else if (head == "RHS") {
        section = Section::kRhs;
      } else if (head == "BOUNDS") {
        section = Section::kBounds;
      } else if (head == "ENDATA") {
        section = Section::kDone;
      } else {
        throw std::runtime_error("MPS line " + std::to_string(line_no) +
                                 ": unsupported section '" + head + "'");
      }
      continue;
    }

    switch (section) {
      case Section::kRows: {
        if (toks.size() != 2) {
          throw std::runtime_error("MPS line " + std::to_string(line_no) +
                                   ": malformed ROWS entry");
        }
        const std::string& type = toks[0];
        if (type == "N") {
          if (objective_row.empty()) objective_row = toks[1];
          break;
        }
        Sense sense;
        if (type == "L") {
          sense = Sense::kLessEqual;
        } else if (type == "E") {
          sense = Sense::kEqual;
        } else if (type == "G") {
          sense = Sense::kGreaterEqual;
        } else {
          throw std::runtime_error("MPS line " + std::to_string(line_no) +
                                   ": unknown row type '" + type + "'");
        }
        row_of.emplace(toks[1], static_cast<int>(row_names.size()));
        row_names.push_back(toks[1]);
        senses.push_back(sense);
        rhs.push_back(0.0);
        break;
      }
      case Section::kColumns: {
        if (toks.size() >= 3 && toks[1] == "'MARKER'") {
          if (toks[2] == "'INTORG'") {
            integer_block = true;
          } else if (toks[2] == "'INTEND'") {
            integer_block = false;
          }
          break;
        }
        if (toks.size() != 3 && toks.size() != 5) {
          throw std::runtime_error("MPS line " + std::to_string(line_no) +
                                   ": malformed COLUMNS entry");
        }
        const int col = column(toks[0]);
        add_entry(col, toks[1], parse_number(toks[2]));
        if (toks.size() == 5) add_entry(col, toks[3], parse_number(toks[4]));
        break;
      }
      case Section::kRhs: {
        const std::size_t first = toks.size() % 2 == 1 ? 1 : 0;
        for (std::size_t p = first; p + 1 < toks.size(); p += 2) {
          if (toks[p] == objective_row) continue;
          rhs[row(toks[p])] = parse_number(toks[p + 1]);
        }
        break;
      }
      case Section::kBounds: {
        if (toks.size() < 3) {
          throw std::runtime_error("MPS line " + std::to_string(line_no) +
                                   ": malformed BOUNDS entry");
        }
        const std::string& type = toks[0];
        auto it = col_of.find(toks[2]);
        if (it == col_of.end()) {
          throw std::runtime_error("MPS: bound on unknown column '" + toks[2] +
                                   "'");
        }
        const int j = it->second;
        const double value = toks.size() > 3 ? parse_number(toks[3]) : 0.0;
        if (type == "UP") {
          upper[j] = value;
        } else if (type == "LO") {
          lower[j] = value;
        } else if (type == "FX") {
          lower[j] = upper[j] = value;
        } else if (type == "FR") {
          lower[j] = -kInf;
          upper[j] = kInf;
        } else if (type == "MI") {
          lower[j] = -kInf;
        } else if (type == "PL") {
          upper[j] = kInf;
        } else if (type == "BV") {
          lower[j] = 0.0;
          upper[j] = 1.0;
          integer[j] = true;
        } else if (type == "LI") {
          lower[j] = value;
          integer[j] = true;
        } else if (type == "UI") {
          upper[j] = value;
          integer[j] = true;
        } else {
          throw std::runtime_error("MPS: unsupported bound type '" + type +
                                   "'");
        }
        break;
      }
      case Section::kNone:
      case Section::kDone:
        break;
    }
  }

  MilpProblem prob;
  const int m = static_cast<int>(row_names.size());
  const int n = static_cast<int>(col_names.size());
  prob.matrix.resize(m, n);
  prob.matrix.setFromTriplets(entries.begin(), entries.end());
  prob.matrix.makeCompressed();
  prob.senses = std::move(senses);
  prob.rhs = Eigen::Map<Eigen::VectorXd>(rhs.data(), m);
  prob.objective = Eigen::Map<Eigen::VectorXd>(objective.data(), n);
  prob.lower = Eigen::Map<Eigen::VectorXd>(lower.data(), n);
  prob.upper = Eigen::Map<Eigen::VectorXd>(upper.data(), n);
  prob.integer = std::move(integer);
  for (const std::string& r : row_names) {
    prob.row_names.push_back(resolve(r));
    if (auto tag = row_tag_from_label(prob.row_names.back())) {
      prob.row_tags.push_back(*tag);
    }
  }
  if (static_cast<int>(prob.row_tags.size()) != m) prob.row_tags.clear();
  for (const std::string& c : col_names) prob.col_names.push_back(resolve(c));
  return prob;
}

}  // namespace ebus
