// PCS text format: line-based parameter space descriptions.
//
//   categorical:  name {v1,v2,...} [default]
//   integer:      name [lo,hi] [default] i      ("il" for log scale)
//   real:         name [lo,hi] [default]        ("l" for log scale)
//   conditional:  child | parent in {v1,v2,...}
//   forbidden:    {name1=v1, name2=v2, ...}

#include <cctype>
#include <fstream>
#include <sstream>

#include "aconf/paramspace.hpp"
#include "space_check.hpp"

namespace aconf {

namespace {

struct Cursor {
  std::string_view text;
  std::size_t pos = 0;
  int line = 0;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }
  bool at_end() {
    skip_ws();
    return pos >= text.size();
  }
  bool peek(char ch) {
    skip_ws();
    return pos < text.size() && text[pos] == ch;
  }
  void expect(char ch) {
    skip_ws();
    if (pos >= text.size() || text[pos] != ch)
      throw SpaceError(std::string("expected '") + ch + "'", line);
    ++pos;
  }
  // A bare token: anything up to whitespace or a structural character.
  std::string token() {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size()) {
      char ch = text[pos];
      if (std::isspace(static_cast<unsigned char>(ch)) || ch == ',' || ch == '{' || ch == '}' || ch == '[' ||
          ch == ']' || ch == '=' || ch == '|')
        break;
      ++pos;
    }
    if (pos == start) throw SpaceError("expected a name or value", line);
    return std::string(text.substr(start, pos - start));
  }
  std::vector<std::string> braced_list() {
    expect('{');
    std::vector<std::string> out;
    if (peek('}')) {
      ++pos;
      return out;
    }
    while (true) {
      out.push_back(token());
      if (peek(',')) {
        ++pos;
        continue;
      }
      expect('}');
      return out;
    }
  }
};

double parse_double(const std::string& s, int line) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw SpaceError("'" + s + "' is not a number", line);
  }
  if (used != s.size() || !std::isfinite(v)) throw SpaceError("'" + s + "' is not a number", line);
  return v;
}

struct RawCondition {
  std::string child, parent;
  std::vector<std::string> values;
  int line;
};

struct RawForbidden {
  std::vector<std::pair<std::string, std::string>> assignments;
  int line;
};

}  // namespace

ParameterSpace parse_pcs(std::string_view text) {
  std::vector<ParameterSpec> params;
  std::vector<RawCondition> raw_conditions;
  std::vector<RawForbidden> raw_forbidden;
  detail::SourceLines lines;

  std::size_t start = 0;
  int line_no = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    Cursor cur{line, 0, line_no};
    if (cur.at_end()) {
      if (end == text.size()) break;
      continue;
    }

    if (cur.peek('{')) {
      RawForbidden f{{}, line_no};
      cur.expect('{');
      while (true) {
        std::string name = cur.token();
        cur.expect('=');
        std::string value = cur.token();
        f.assignments.emplace_back(std::move(name), std::move(value));
        if (cur.peek(',')) {
          ++cur.pos;
          continue;
        }
        cur.expect('}');
        break;
      }
      if (!cur.at_end()) throw SpaceError("trailing text after forbidden clause", line_no);
      raw_forbidden.push_back(std::move(f));
    } else if (line.find('|') != std::string_view::npos) {
      RawCondition c;
      c.line = line_no;
      c.child = cur.token();
      cur.expect('|');
      c.parent = cur.token();
      if (cur.token() != "in") throw SpaceError("expected 'in' in condition", line_no);
      c.values = cur.braced_list();
      if (!cur.at_end()) throw SpaceError("trailing text after condition", line_no);
      raw_conditions.push_back(std::move(c));
    } else {
      ParameterSpec p;
      p.name = cur.token();
      if (cur.peek('{')) {
        p.kind = ParamKind::categorical;
        p.values = cur.braced_list();
        cur.expect('[');
        std::string def = cur.token();
        cur.expect(']');
        auto idx = p.parse(def);
        if (!idx) throw SpaceError("default '" + def + "' of '" + p.name + "' lies outside its domain", line_no);
        p.default_value = *idx;
        if (!cur.at_end()) throw SpaceError("trailing text after categorical parameter", line_no);
      } else if (cur.peek('[')) {
        cur.expect('[');
        p.lo = parse_double(cur.token(), line_no);
        cur.expect(',');
        p.hi = parse_double(cur.token(), line_no);
        cur.expect(']');
        cur.expect('[');
        p.default_value = parse_double(cur.token(), line_no);
        cur.expect(']');
        p.kind = ParamKind::real;
        if (!cur.at_end()) {
          std::string flags = cur.token();
          if (flags == "i") {
            p.kind = ParamKind::integer;
          } else if (flags == "il" || flags == "li") {
            p.kind = ParamKind::integer;
            p.log_scale = true;
          } else if (flags == "l") {
            p.log_scale = true;
          } else {
            throw SpaceError("unknown parameter flags '" + flags + "'", line_no);
          }
        }
        if (!cur.at_end()) throw SpaceError("trailing text after numeric parameter", line_no);
      } else {
        throw SpaceError("expected a domain after '" + p.name + "'", line_no);
      }
      params.push_back(std::move(p));
      lines.params.push_back(line_no);
    }
    if (end == text.size()) break;
  }

  auto find = [&](const std::string& name) -> const ParameterSpec* {
    for (const auto& p : params)
      if (p.name == name) return &p;
    return nullptr;
  };

  std::vector<ConditionClause> conditions;
  for (const auto& rc : raw_conditions) {
    const auto* parent = find(rc.parent);
    if (find(rc.child) == nullptr) throw SpaceError("condition on unknown parameter '" + rc.child + "'", rc.line);
    if (parent == nullptr) throw SpaceError("condition names unknown parent '" + rc.parent + "'", rc.line);
    ConditionClause c{rc.child, rc.parent, {}};
    for (const auto& v : rc.values) {
      auto enc = parent->parse(v);
      if (!enc || !parent->in_domain(*enc))
        throw SpaceError("'" + v + "' is not in the domain of '" + rc.parent + "'", rc.line);
      c.allowed_values.push_back(*enc);
    }
    conditions.push_back(std::move(c));
    lines.conditions.push_back(rc.line);
  }

  std::vector<ForbiddenClause> forbidden;
  for (const auto& rf : raw_forbidden) {
    ForbiddenClause f;
    for (const auto& [name, value] : rf.assignments) {
      const auto* p = find(name);
      if (p == nullptr) throw SpaceError("forbidden clause names unknown parameter '" + name + "'", rf.line);
      auto enc = p->parse(value);
      if (!enc || !p->in_domain(*enc))
        throw SpaceError("forbidden value '" + value + "' is not in the domain of '" + name + "'", rf.line);
      f.assignments.emplace_back(name, *enc);
    }
    forbidden.push_back(std::move(f));
    lines.forbidden.push_back(rf.line);
  }

  detail::check_space(params, conditions, forbidden, &lines);
  try {
    return ParameterSpace(std::move(params), std::move(conditions), std::move(forbidden));
  } catch (const SpaceError& e) {
    // Only the default-forbidden check can fail here; point at the first matching clause.
    throw SpaceError(e.what(), lines.forbidden.empty() ? 0 : lines.forbidden.front());
  }
}

ParameterSpace load_pcs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpaceError("cannot read '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_pcs(buf.str());
}

std::string serialize_pcs(const ParameterSpace& space) {
  std::ostringstream out;
  for (const auto& p : space.parameters()) {
    out << p.name << ' ';
    if (p.kind == ParamKind::categorical) {
      out << '{';
      for (std::size_t i = 0; i < p.values.size(); ++i) out << (i ? "," : "") << p.values[i];
      out << "} [" << p.format(p.default_value) << "]\n";
    } else {
      out << '[' << format_number(p.lo) << ',' << format_number(p.hi) << "] [" << format_number(p.default_value)
          << ']';
      if (p.kind == ParamKind::integer) out << (p.log_scale ? " il" : " i");
      else if (p.log_scale) out << " l";
      out << '\n';
    }
  }
  if (!space.conditions().empty()) {
    out << '\n';
    for (const auto& c : space.conditions()) {
      const auto& parent = space.param(c.parent);
      out << c.child << " | " << c.parent << " in {";
      for (std::size_t i = 0; i < c.allowed_values.size(); ++i)
        out << (i ? "," : "") << parent.format(c.allowed_values[i]);
      out << "}\n";
    }
  }
  if (!space.forbidden().empty()) {
    out << '\n';
    for (const auto& f : space.forbidden()) {
      out << '{';
      for (std::size_t i = 0; i < f.assignments.size(); ++i) {
        const auto& [name, v] = f.assignments[i];
        out << (i ? ", " : "") << name << '=' << space.param(name).format(v);
      }
      out << "}\n";
    }
  }
  return out.str();
}

}  // namespace aconf
