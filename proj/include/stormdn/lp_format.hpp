#pragma once

// Writer and reader for the CPLEX-style LP text format.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "stormdn/error.hpp"
#include "stormdn/mip_model.hpp"

namespace stormdn {

// Bracket names (`P[3,2,1]`) are the native column names. Some LP readers
// reserve square brackets for quadratic terms; Paren style writes `P(3,2,1)`.
enum class LpNameStyle { Bracket, Paren };

namespace detail {

inline std::string lp_number(double v) {
  if (v == kInf) return "+inf";
  if (v == -kInf) return "-inf";
  if (v == 0.0) return "0";
  // Shortest text that reads back to the same double.
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string lp_name(const std::string& name, LpNameStyle style) {
  if (style == LpNameStyle::Bracket) return name;
  std::string out = name;
  for (auto& c : out) {
    if (c == '[') c = '(';
    if (c == ']') c = ')';
  }
  return out;
}

class TermWriter {
 public:
  TermWriter(std::ostream& os, std::string lead) : os_(os) { os_ << lead; }
  void term(double coeff, const std::string& name) {
    if (count_ > 0 && count_ % 8 == 0) os_ << "\n   ";
    os_ << (coeff < 0 ? " - " : " + ") << lp_number(std::abs(coeff)) << ' ' << name;
    ++count_;
  }
  void constant(double v) {
    if (v == 0.0) return;
    os_ << (v < 0 ? " - " : " + ") << lp_number(std::abs(v));
    ++count_;
  }
  int count() const { return count_; }

 private:
  std::ostream& os_;
  int count_ = 0;
};

// Splits glued terms such as `+3x` or `x+y` into signs, numbers and names.
// Comparison operators and labels pass through unchanged.
inline std::vector<std::string> split_expr_token(const std::string& t) {
  if (t.empty() || t.back() == ':' || t.find_first_of("<>=") != std::string::npos) return {t};
  std::vector<std::string> out;
  std::size_t i = 0;
  const auto digit = [&](std::size_t k) { return k < t.size() && std::isdigit(static_cast<unsigned char>(t[k])); };
  while (i < t.size()) {
    const char c = t[i];
    if (c == '+' || c == '-') {
      out.emplace_back(1, c);
      ++i;
    } else if (digit(i) || (c == '.' && digit(i + 1))) {
      const std::size_t start = i;
      while (digit(i) || (i < t.size() && t[i] == '.')) ++i;
      if (i < t.size() && (t[i] == 'e' || t[i] == 'E')) {
        std::size_t k = i + 1;
        if (k < t.size() && (t[k] == '+' || t[k] == '-')) ++k;
        if (digit(k)) {
          i = k;
          while (digit(i)) ++i;
        }
      }
      out.push_back(t.substr(start, i - start));
    } else {
      const std::size_t start = i;
      while (i < t.size() && t[i] != '+' && t[i] != '-') ++i;
      out.push_back(t.substr(start, i - start));
    }
  }
  return out;
}

}  // namespace detail

inline void write_lp(const MipModel& m, std::ostream& os, LpNameStyle style = LpNameStyle::Bracket) {
  std::vector<std::vector<std::pair<int, double>>> by_row(m.num_rows());
  for (const auto& t : m.triplets()) by_row[t.row].push_back({t.col, t.value});
  auto cname = [&](int c) { return detail::lp_name(m.column(c).name, style); };

  os << "Minimize\n";
  {
    detail::TermWriter w(os, " obj:");
    for (int c = 0; c < m.num_columns(); ++c) {
      if (m.column(c).cost != 0.0) w.term(m.column(c).cost, cname(c));
    }
    w.constant(m.objective_offset);
    if (w.count() == 0) os << " 0 " << (m.num_columns() > 0 ? cname(0) : std::string("dummy"));
    os << '\n';
  }
  os << "Subject To\n";
  for (int r = 0; r < m.num_rows(); ++r) {
    const Row& row = m.row(r);
    detail::TermWriter w(os, " " + detail::lp_name(row.name, style) + ":");
    for (auto [c, v] : by_row[r]) w.term(v, cname(c));
    if (w.count() == 0) os << " 0 " << (m.num_columns() > 0 ? cname(0) : std::string("dummy"));
    const char* op = row.sense == Sense::LessEqual ? "<=" : row.sense == Sense::GreaterEqual ? ">=" : "=";
    os << ' ' << op << ' ' << detail::lp_number(row.rhs) << '\n';
  }
  std::ostringstream bounds;
  std::vector<int> binaries, generals;
  for (int c = 0; c < m.num_columns(); ++c) {
    const Column& col = m.column(c);
    const bool binary = col.integer && col.lb == 0.0 && col.ub == 1.0;
    if (binary) {
      binaries.push_back(c);
      continue;
    }
    if (col.integer) generals.push_back(c);
    if (col.lb == 0.0 && col.ub == kInf) continue;
    if (col.lb == -kInf && col.ub == kInf) {
      bounds << ' ' << cname(c) << " free\n";
    } else if (col.lb == col.ub) {
      bounds << ' ' << cname(c) << " = " << detail::lp_number(col.lb) << '\n';
    } else {
      bounds << ' ' << detail::lp_number(col.lb) << " <= " << cname(c) << " <= "
             << detail::lp_number(col.ub) << '\n';
    }
  }
  if (!bounds.str().empty()) os << "Bounds\n" << bounds.str();
  if (!binaries.empty()) {
    os << "Binaries\n";
    for (int c : binaries) os << ' ' << cname(c) << '\n';
  }
  if (!generals.empty()) {
    os << "Generals\n";
    for (int c : generals) os << ' ' << cname(c) << '\n';
  }
  os << "End\n";
}

inline void export_lp_file(const MipModel& m, const std::string& path,
                           LpNameStyle style = LpNameStyle::Bracket) {
  std::ofstream f(path);
  if (!f) throw InvalidInput("cannot open " + path + " for writing");
  write_lp(m, f, style);
  f.flush();
  if (!f) throw InvalidInput("failed writing " + path);
}

// Reads the LP subset produced by write_lp plus the usual variations
// (case-insensitive section keywords, Maximize, unnamed rows, comments).
// Columns appear in order of first mention.
inline MipModel read_lp(std::istream& is) {
  enum class Section { None, Objective, Constraints, Bounds, Binaries, Generals, End };
  MipModel m;
  std::map<std::string, int> cols;
  bool maximize = false;
  struct PendingRow {
    std::string name;
    Terms terms;
    Sense sense;
    double rhs;
  };
  std::vector<PendingRow> pending;
  std::vector<std::pair<int, double>> obj;
  double offset = 0.0;
  std::vector<int> explicit_bounds;

  auto col_of = [&](const std::string& name) {
    auto it = cols.find(name);
    if (it != cols.end()) return it->second;
    const int c = m.add_column(name, 0.0, kInf);
    cols.emplace(name, c);
    return c;
  };
  auto lower = [](std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  };
  auto parse_number = [](const std::string& tok, double& out) {
    const std::string t = tok[0] == '+' ? tok.substr(1) : tok;
    std::string lo;
    for (char c : t) lo += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lo == "inf" || lo == "infinity") {
      out = kInf;
      return true;
    }
    if (lo == "-inf" || lo == "-infinity") {
      out = -kInf;
      return true;
    }
    char* end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end && *end == '\0' && !t.empty();
  };

  // Gather the file into statements per section; a statement ends when the
  // next one starts with a label, or at a comparison followed by its rhs.
  std::vector<std::string> tokens;
  std::vector<Section> token_section;
  Section section = Section::None;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (auto p = line.find('\\'); p != std::string::npos) line.resize(p);
    std::istringstream ls(line);
    std::vector<std::string> toks;
    for (std::string t; ls >> t;) toks.push_back(t);
    if (toks.empty()) continue;
    const std::string head = lower(toks[0]);
    std::size_t skip = 0;
    if (head == "minimize" || head == "minimum" || head == "min") {
      section = Section::Objective;
      skip = 1;
    } else if (head == "maximize" || head == "maximum" || head == "max") {
      section = Section::Objective;
      maximize = true;
      skip = 1;
    } else if (head == "subject" && toks.size() > 1 && lower(toks[1]) == "to") {
      section = Section::Constraints;
      skip = 2;
    } else if (head == "such" && toks.size() > 1 && lower(toks[1]) == "that") {
      section = Section::Constraints;
      skip = 2;
    } else if (head == "st" || head == "s.t." || head == "subject_to") {
      section = Section::Constraints;
      skip = 1;
    } else if (head == "bounds" || head == "bound") {
      section = Section::Bounds;
      skip = 1;
    } else if (head == "binaries" || head == "binary" || head == "bin") {
      section = Section::Binaries;
      skip = 1;
    } else if (head == "generals" || head == "general" || head == "gen" || head == "integers") {
      section = Section::Generals;
      skip = 1;
    } else if (head == "end") {
      section = Section::End;
      skip = toks.size();
    }
    if (section == Section::None && skip == 0) {
      throw InvalidInput("LP line " + std::to_string(line_no) + ": content before a section keyword");
    }
    if (section == Section::Bounds && skip == 0) {
      // One bound statement per line.
      tokens.push_back("\n");
      token_section.push_back(section);
    }
    for (std::size_t i = skip; i < toks.size(); ++i) {
      if (section == Section::Objective || section == Section::Constraints) {
        for (auto& piece : detail::split_expr_token(toks[i])) {
          tokens.push_back(std::move(piece));
          token_section.push_back(section);
        }
      } else {
        tokens.push_back(toks[i]);
        token_section.push_back(section);
      }
    }
  }

  // Linear expression statements (objective and constraints).
  auto is_op = [](const std::string& t) {
    return t == "<=" || t == ">=" || t == "=" || t == "<" || t == ">" || t == "=<" || t == "=>";
  };
  std::size_t i = 0;
  auto parse_expr = [&](Section sec, std::string& label, Terms& terms, double& constant,
                        std::string& op, double& rhs) {
    label.clear();
    terms.clear();
    constant = 0.0;
    op.clear();
    if (i < tokens.size() && tokens[i].size() > 1 && tokens[i].back() == ':') {
      label = tokens[i].substr(0, tokens[i].size() - 1);
      ++i;
    } else if (i + 1 < tokens.size() && tokens[i + 1] == ":") {
      label = tokens[i];
      i += 2;
    }
    double sign = 1.0;
    double coeff = 1.0;
    bool have_coeff = false;
    while (i < tokens.size() && token_section[i] == sec) {
      const std::string& t = tokens[i];
      if (sec == Section::Objective || sec == Section::Constraints) {
        if (t.size() > 1 && t.back() == ':' && (!terms.empty() || have_coeff || constant != 0.0)) break;
      }
      if (is_op(t)) {
        op = t;
        ++i;
        double v = 0.0;
        double rs = 1.0;
        while (i < tokens.size() && (tokens[i] == "+" || tokens[i] == "-")) {
          if (tokens[i] == "-") rs = -rs;
          ++i;
        }
        if (i >= tokens.size() || !parse_number(tokens[i], v)) throw InvalidInput("LP: missing right-hand side");
        rhs = rs * v;
        ++i;
        return;
      }
      if (t == "+") {
        ++i;
        continue;
      }
      if (t == "-") {
        sign = -sign;
        ++i;
        continue;
      }
      double v;
      if (parse_number(t, v)) {
        coeff *= v;
        have_coeff = true;
        ++i;
        // A number not followed by a name is a constant.
        const bool next_is_name = i < tokens.size() && token_section[i] == sec && !is_op(tokens[i]) &&
                                  tokens[i] != "+" && tokens[i] != "-" &&
                                  !(tokens[i].size() > 1 && tokens[i].back() == ':');
        double tmp;
        if (!next_is_name || parse_number(tokens[i], tmp)) {
          constant += sign * coeff;
          sign = 1.0;
          coeff = 1.0;
          have_coeff = false;
        }
        continue;
      }
      if (t == ":") {
        ++i;
        continue;
      }
      terms.push_back({col_of(t), sign * coeff});
      sign = 1.0;
      coeff = 1.0;
      have_coeff = false;
      ++i;
      if (sec == Section::Objective) continue;
    }
  };

  int unnamed = 0;
  while (i < tokens.size()) {
    const Section sec = token_section[i];
    if (sec == Section::Objective) {
      std::string label, op;
      Terms terms;
      double constant = 0.0, rhs = 0.0;
      parse_expr(sec, label, terms, constant, op, rhs);
      for (auto& t : terms) obj.push_back(t);
      offset += constant;
    } else if (sec == Section::Constraints) {
      std::string label, op;
      Terms terms;
      double constant = 0.0, rhs = 0.0;
      parse_expr(sec, label, terms, constant, op, rhs);
      if (op.empty()) throw InvalidInput("LP: constraint " + label + " has no comparison");
      Sense sense = op[0] == '<' || op == "=<" ? Sense::LessEqual
                    : (op[0] == '>' || op == "=>") ? Sense::GreaterEqual
                                                   : Sense::Equal;
      if (label.empty()) label = "R" + std::to_string(++unnamed);
      pending.push_back({label, std::move(terms), sense, rhs - constant});
    } else if (sec == Section::Bounds) {
      if (tokens[i] == "\n") {
        ++i;
        std::vector<std::string> st;
        while (i < tokens.size() && token_section[i] == Section::Bounds && tokens[i] != "\n") st.push_back(tokens[i++]);
        if (st.empty()) continue;
        auto num = [&](const std::string& t, double& v) { return parse_number(t, v); };
        double a, b;
        if (st.size() == 2 && lower(st[1]) == "free") {
          const int c = col_of(st[0]);
          m.column(c).lb = -kInf;
          m.column(c).ub = kInf;
        } else if (st.size() == 5 && num(st[0], a) && num(st[4], b)) {
          const int c = col_of(st[2]);
          m.column(c).lb = a;
          m.column(c).ub = b;
        } else if (st.size() == 3 && num(st[2], a)) {
          const int c = col_of(st[0]);
          if (st[1] == "<=" || st[1] == "<") m.column(c).ub = a;
          else if (st[1] == ">=" || st[1] == ">") m.column(c).lb = a;
          else {
            m.column(c).lb = a;
            m.column(c).ub = a;
          }
        } else if (st.size() == 3 && num(st[0], a)) {
          const int c = col_of(st[2]);
          if (st[1] == "<=" || st[1] == "<") m.column(c).lb = a;
          else if (st[1] == ">=" || st[1] == ">") m.column(c).ub = a;
          else {
            m.column(c).lb = a;
            m.column(c).ub = a;
          }
        } else {
          throw InvalidInput("LP: cannot parse bound statement");
        }
      } else {
        ++i;
      }
    } else if (sec == Section::Binaries) {
      const int c = col_of(tokens[i++]);
      m.column(c).integer = true;
      m.column(c).lb = 0.0;
      m.column(c).ub = 1.0;
    } else if (sec == Section::Generals) {
      m.column(col_of(tokens[i++])).integer = true;
    } else {
      ++i;
    }
  }
  for (auto [c, v] : obj) m.add_cost(c, maximize ? -v : v);
  m.objective_offset = maximize ? -offset : offset;
  for (auto& r : pending) m.add_row(r.name, r.terms, r.sense, r.rhs);
  return m;
}

inline MipModel read_lp_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InvalidInput("cannot open " + path);
  return read_lp(f);
}

}  // namespace stormdn
