#include "idmilp/lp_format.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace idmilp {

namespace {

constexpr std::size_t kTermsPerLine = 8;

std::string number(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

void write_terms(std::ostringstream& out, const MilpModel& model, const std::vector<Term>& terms) {
  std::size_t written = 0;
  for (const auto& t : terms) {
    if (written > 0 && written % kTermsPerLine == 0) out << "\n   ";
    out << (std::signbit(t.coef) ? " - " : " + ") << number(std::abs(t.coef)) << ' '
        << model.variables()[static_cast<std::size_t>(t.var)].name;
    ++written;
  }
}

std::string bound(double value) {
  if (value == kInfinity) return "+inf";
  if (value == -kInfinity) return "-inf";
  return number(value);
}

}  // namespace

std::string export_lp(const MilpModel& model) {
  std::ostringstream out;
  out << "\\ idmilp model: " << model.variables().size() << " variables, " << model.constraints().size()
      << " constraints\n";
  out << "Maximize\n obj:";
  write_terms(out, model, model.objective());
  out << "\nSubject To\n";
  for (const auto& c : model.constraints()) {
    out << ' ' << c.name << ':';
    if (c.terms.empty()) {
      if (model.variables().empty()) throw std::invalid_argument("cannot write an empty row without variables");
      out << " 0 " << model.variables().front().name;
    } else {
      write_terms(out, model, c.terms);
    }
    switch (c.sense) {
      case RowSense::le:
        out << " <= ";
        break;
      case RowSense::eq:
        out << " = ";
        break;
      case RowSense::ge:
        out << " >= ";
        break;
    }
    out << number(c.rhs) << '\n';
  }
  if (!model.variables().empty()) {
    out << "Bounds\n";
    for (const auto& v : model.variables()) {
      if (v.lower == -kInfinity && v.upper == kInfinity) out << ' ' << v.name << " free\n";
      else out << ' ' << bound(v.lower) << " <= " << v.name << " <= " << bound(v.upper) << '\n';
    }
  }
  if (model.binary_count() > 0) {
    out << "Binary\n";
    for (const auto& v : model.variables())
      if (v.type == VarType::binary) out << ' ' << v.name << '\n';
  }
  out << "End\n";
  return out.str();
}

namespace {

enum class Section { none, objective, constraints, bounds, binary, general, end };

enum class TokenKind { name, number, sign, colon, sense };

struct Token {
  TokenKind kind;
  std::string text;
  double value = 0.0;
};

std::string lower(std::string_view s) {
  std::string r(s);
  std::transform(r.begin(), r.end(), r.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return r;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool is_name_stop(char c) {
  return std::isspace(static_cast<unsigned char>(c)) || c == ':' || c == '<' || c == '>' || c == '=' || c == '+' ||
         c == '-';
}

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == ':') {
      tokens.push_back({TokenKind::colon, ":"});
      ++i;
    } else if (c == '+' || c == '-') {
      tokens.push_back({TokenKind::sign, std::string(1, c)});
      ++i;
    } else if (c == '<' || c == '>' || c == '=') {
      std::string op(1, c);
      ++i;
      if (i < line.size() && (line[i] == '=' || line[i] == '<' || line[i] == '>')) op += line[i++];
      if (op == "<" || op == "<=" || op == "=<") op = "<=";
      else if (op == ">" || op == ">=" || op == "=>") op = ">=";
      else if (op != "=") throw std::invalid_argument("bad operator '" + op + "'");
      tokens.push_back({TokenKind::sense, op});
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::string buffer(line.substr(i));
      char* end = nullptr;
      const double v = std::strtod(buffer.c_str(), &end);
      if (end == buffer.c_str()) throw std::invalid_argument("bad number in LP text");
      const auto consumed = static_cast<std::size_t>(end - buffer.c_str());
      tokens.push_back({TokenKind::number, buffer.substr(0, consumed), v});
      i += consumed;
    } else {
      std::size_t j = i;
      while (j < line.size() && !is_name_stop(line[j])) ++j;
      tokens.push_back({TokenKind::name, std::string(line.substr(i, j - i))});
      i = j;
    }
  }
  return tokens;
}

std::optional<Section> section_keyword(const std::string& trimmed) {
  const std::string l = lower(trimmed);
  if (l == "maximize" || l == "maximise" || l == "maximum" || l == "max") return Section::objective;
  if (l == "minimize" || l == "minimise" || l == "minimum" || l == "min")
    throw std::invalid_argument("minimization models are not supported");
  if (l == "subject to" || l == "such that" || l == "st" || l == "s.t.") return Section::constraints;
  if (l == "bounds" || l == "bound") return Section::bounds;
  if (l == "binary" || l == "binaries" || l == "bin") return Section::binary;
  if (l == "general" || l == "generals" || l == "gen") return Section::general;
  if (l == "end") return Section::end;
  return std::nullopt;
}

bool infinite_word(const std::string& s) {
  const std::string l = lower(s);
  return l == "inf" || l == "infinity";
}

struct RawRow {
  std::string name;
  std::vector<std::pair<std::string, double>> terms;
  RowSense sense = RowSense::le;
  double rhs = 0.0;
};

class Parser {
 public:
  MilpModel run(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    Section section = Section::none;
    std::vector<Token> objective_tokens, row_tokens;
    while (std::getline(in, line)) {
      if (auto cut = line.find('\\'); cut != std::string::npos) line.erase(cut);
      const std::string t = trim(line);
      if (t.empty()) continue;
      if (auto s = section_keyword(t)) {
        section = *s;
        if (section == Section::end) break;
        continue;
      }
      auto tokens = tokenize(t);
      switch (section) {
        case Section::objective:
          objective_tokens.insert(objective_tokens.end(), tokens.begin(), tokens.end());
          break;
        case Section::constraints:
          row_tokens.insert(row_tokens.end(), tokens.begin(), tokens.end());
          break;
        case Section::bounds:
          parse_bound(tokens);
          break;
        case Section::binary:
          for (const auto& tok : tokens) {
            if (tok.kind != TokenKind::name) throw std::invalid_argument("expected names under Binary");
            binaries_.push_back(tok.text);
            touch(tok.text);
          }
          break;
        case Section::general:
          throw std::invalid_argument("general integer variables are not supported");
        case Section::none:
        case Section::end:
          throw std::invalid_argument("LP text outside of any section: " + t);
      }
    }
    parse_objective(objective_tokens);
    parse_rows(row_tokens);
    return assemble();
  }

 private:
  void touch(const std::string& name) {
    if (seen_.emplace(name, order_.size()).second) order_.push_back(name);
  }

  void touch_bound(const std::string& name) {
    touch(name);
    bound_seen_.emplace(name, bound_seen_.size());
  }

  void parse_bound(const std::vector<Token>& tokens) {
    if (tokens.empty()) return;
    auto value_at = [&](std::size_t& i) -> double {
      double sign = 1.0;
      if (i < tokens.size() && tokens[i].kind == TokenKind::sign) sign = tokens[i++].text == "-" ? -1.0 : 1.0;
      if (i >= tokens.size()) throw std::invalid_argument("truncated bound");
      const auto& tok = tokens[i++];
      if (tok.kind == TokenKind::number) return sign * tok.value;
      if (tok.kind == TokenKind::name && infinite_word(tok.text)) return sign * kInfinity;
      throw std::invalid_argument("expected a bound value");
    };
    if (tokens.size() == 2 && tokens[0].kind == TokenKind::name && lower(tokens[1].text) == "free") {
      touch_bound(tokens[0].text);
      lower_[tokens[0].text] = -kInfinity;
      upper_[tokens[0].text] = kInfinity;
      return;
    }
    std::size_t i = 0;
    if (tokens[0].kind == TokenKind::name && !infinite_word(tokens[0].text)) {
      // name op value
      const std::string name = tokens[0].text;
      touch_bound(name);
      if (tokens.size() < 3 || tokens[1].kind != TokenKind::sense) throw std::invalid_argument("bad bound line");
      const std::string op = tokens[1].text;
      i = 2;
      const double v = value_at(i);
      if (op == "<=") upper_[name] = v;
      else if (op == ">=") lower_[name] = v;
      else lower_[name] = upper_[name] = v;
      return;
    }
    // value <= name [<= value]
    const double lo = value_at(i);
    if (i + 1 >= tokens.size() || tokens[i].kind != TokenKind::sense || tokens[i + 1].kind != TokenKind::name)
      throw std::invalid_argument("bad bound line");
    const std::string op = tokens[i].text;
    const std::string name = tokens[i + 1].text;
    touch_bound(name);
    i += 2;
    if (op == "<=") lower_[name] = lo;
    else if (op == ">=") upper_[name] = lo;
    else lower_[name] = upper_[name] = lo;
    if (i < tokens.size()) {
      if (tokens[i].kind != TokenKind::sense) throw std::invalid_argument("bad bound line");
      const std::string op2 = tokens[i++].text;
      const double hi = value_at(i);
      if (op2 == "<=") upper_[name] = hi;
      else if (op2 == ">=") lower_[name] = hi;
      else throw std::invalid_argument("bad bound line");
    }
  }

  /// Reads `[sign] [coef] name` terms starting at i until a sense token or
  /// the end; returns the position reached.
  std::size_t read_terms(const std::vector<Token>& tokens, std::size_t i,
                         std::vector<std::pair<std::string, double>>& terms) {
    while (i < tokens.size() && tokens[i].kind != TokenKind::sense) {
      double sign = 1.0;
      while (i < tokens.size() && tokens[i].kind == TokenKind::sign) sign *= tokens[i++].text == "-" ? -1.0 : 1.0;
      double coef = 1.0;
      if (i < tokens.size() && tokens[i].kind == TokenKind::number) coef = tokens[i++].value;
      if (i >= tokens.size() || tokens[i].kind != TokenKind::name)
        throw std::invalid_argument("expected a variable name in linear expression");
      const std::string& name = tokens[i++].text;
      touch(name);
      terms.emplace_back(name, sign * coef);
    }
    return i;
  }

  void parse_objective(const std::vector<Token>& tokens) {
    std::size_t i = 0;
    if (tokens.size() >= 2 && tokens[0].kind == TokenKind::name && tokens[1].kind == TokenKind::colon) i = 2;
    i = read_terms(tokens, i, objective_);
    if (i != tokens.size()) throw std::invalid_argument("unexpected operator in objective");
  }

  void parse_rows(const std::vector<Token>& tokens) {
    std::size_t i = 0;
    while (i < tokens.size()) {
      RawRow row;
      if (i + 1 < tokens.size() && tokens[i].kind == TokenKind::name && tokens[i + 1].kind == TokenKind::colon) {
        row.name = tokens[i].text;
        i += 2;
      } else {
        row.name = "R" + std::to_string(rows_.size());
      }
      i = read_terms(tokens, i, row.terms);
      if (i >= tokens.size()) throw std::invalid_argument("row " + row.name + " lacks a sense");
      const std::string op = tokens[i++].text;
      row.sense = op == "<=" ? RowSense::le : op == ">=" ? RowSense::ge : RowSense::eq;
      double sign = 1.0;
      while (i < tokens.size() && tokens[i].kind == TokenKind::sign) sign *= tokens[i++].text == "-" ? -1.0 : 1.0;
      if (i >= tokens.size() || tokens[i].kind != TokenKind::number)
        throw std::invalid_argument("row " + row.name + " lacks a right-hand side");
      row.rhs = sign * tokens[i++].value;
      rows_.push_back(std::move(row));
    }
  }

  MilpModel assemble() {
    // Columns: Bounds order first (export_lp lists every column there), then
    // any remaining names by first appearance.
    std::vector<std::string> columns;
    std::unordered_map<std::string, bool> placed;
    for (const auto& name : bound_order()) {
      if (!placed[name]) columns.push_back(name);
      placed[name] = true;
    }
    for (const auto& name : order_) {
      if (!placed[name]) columns.push_back(name);
      placed[name] = true;
    }
    std::unordered_map<std::string, bool> is_binary;
    for (const auto& b : binaries_) is_binary[b] = true;

    MilpModel model;
    for (const auto& name : columns) {
      if (is_binary[name]) {
        model.add_binary(name);
        continue;
      }
      const double lo = lower_.count(name) ? lower_[name] : 0.0;
      const double hi = upper_.count(name) ? upper_[name] : kInfinity;
      model.add_variable(name, lo, hi, VarType::continuous);
    }
    auto convert = [&](const std::vector<std::pair<std::string, double>>& raw) {
      std::vector<Term> terms;
      for (const auto& [name, coef] : raw)
        if (coef != 0.0) terms.push_back({model.variable_index(name), coef});
      return terms;
    };
    model.set_objective(convert(objective_));
    for (const auto& row : rows_) model.add_constraint(row.name, convert(row.terms), row.sense, row.rhs);
    return model;
  }

  std::vector<std::string> bound_order() const {
    std::vector<std::pair<std::size_t, std::string>> named;
    for (const auto& [name, pos] : bound_seen_) named.emplace_back(pos, name);
    std::sort(named.begin(), named.end());
    std::vector<std::string> result;
    for (auto& [pos, name] : named) result.push_back(name);
    return result;
  }

  std::vector<std::string> order_;
  std::unordered_map<std::string, std::size_t> seen_;
  std::unordered_map<std::string, std::size_t> bound_seen_;
  std::unordered_map<std::string, double> lower_, upper_;
  std::vector<std::string> binaries_;
  std::vector<std::pair<std::string, double>> objective_;
  std::vector<RawRow> rows_;
};

}  // namespace

MilpModel parse_lp(std::string_view text) { return Parser().run(text); }

}  // namespace idmilp
