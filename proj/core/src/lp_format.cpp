#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "minleaf/error.hpp"
#include "minleaf/mio.hpp"

namespace minleaf {

namespace {

constexpr std::size_t kTermsPerLine = 8;

std::string number(double v) {
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// Appends " + 2.5 name" style terms, wrapping every few terms.
void write_terms(std::ostringstream& out, const MioModel& model, std::vector<Term> terms) {
  const auto& vars = model.variables();
  std::sort(terms.begin(), terms.end(),
            [&](const Term& a, const Term& b) { return natural_less(vars[a.var].name, vars[b.var].name); });
  std::size_t written = 0;
  for (const Term& t : terms) {
    if (t.coef == 0.0) continue;
    if (written > 0 && written % kTermsPerLine == 0) out << "\n  ";
    const double mag = std::abs(t.coef);
    if (t.coef < 0) {
      out << (written == 0 ? "- " : " - ");
    } else if (written > 0) {
      out << " + ";
    }
    if (mag != 1.0) out << number(mag) << ' ';
    out << vars[t.var].name;
    ++written;
  }
  if (written == 0) out << "0 " << vars.front().name;
}

}  // namespace

std::string emit_lp(const MioModel& model) {
  const auto& meta = model.metadata;
  std::ostringstream out;
  out << "\\ meta n=" << meta.n << " p=" << meta.p << " k=" << meta.k << " depth=" << meta.depth
      << " n_min=" << meta.n_min << " objective=" << to_string(meta.objective) << '\n';
  out << "Maximize\n obj: ";
  write_terms(out, model, model.objective());
  out << "\nSubject To\n";

  std::vector<const LinearConstraint*> rows;
  rows.reserve(model.constraints().size());
  for (const auto& c : model.constraints()) rows.push_back(&c);
  std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return natural_less(a->id, b->id); });
  for (const auto* c : rows) {
    out << ' ' << c->id << ": ";
    write_terms(out, model, c->terms);
    out << (c->sense == Sense::le ? " <= " : c->sense == Sense::ge ? " >= " : " = ") << number(c->rhs) << '\n';
  }

  std::vector<const MioVariable*> vars;
  for (const auto& v : model.variables()) vars.push_back(&v);
  std::sort(vars.begin(), vars.end(), [](auto* a, auto* b) { return natural_less(a->name, b->name); });
  out << "Bounds\n";
  for (const auto* v : vars) {
    if (v->kind != VarKind::continuous) continue;
    if (std::isinf(v->lower) && std::isinf(v->upper)) {
      out << ' ' << v->name << " free\n";
    } else {
      out << ' ' << number(v->lower) << " <= " << v->name << " <= " << number(v->upper) << '\n';
    }
  }
  const bool any_binary =
      std::any_of(vars.begin(), vars.end(), [](auto* v) { return v->kind == VarKind::binary; });
  if (any_binary) out << "Binaries\n";
  std::size_t on_line = 0;
  for (const auto* v : vars) {
    if (v->kind != VarKind::binary) continue;
    out << ' ' << v->name;
    if (++on_line == kTermsPerLine) {
      out << '\n';
      on_line = 0;
    }
  }
  if (on_line) out << '\n';
  out << "End\n";
  return out.str();
}

namespace {

enum class Tok { name, number, colon, plus, minus, le, ge, eq };

struct Token {
  Tok kind;
  std::string text;
  double value = 0.0;
  std::size_t line = 0;
};

enum class Section { none, objective, constraints, bounds, binaries, generals, end };

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_name_char(char c) {
  return !std::isspace(static_cast<unsigned char>(c)) && c != ':' && c != '<' && c != '>' && c != '=' && c != '+' &&
         c != '-';
}

bool is_infinity(std::string_view s) {
  const std::string l = lower(s);
  return l == "inf" || l == "infinity";
}

void tokenize(std::string_view line, std::size_t line_no, std::vector<Token>& out) {
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == ':') {
      out.push_back({Tok::colon, ":", 0, line_no});
      ++i;
    } else if (c == '+') {
      out.push_back({Tok::plus, "+", 0, line_no});
      ++i;
    } else if (c == '-') {
      out.push_back({Tok::minus, "-", 0, line_no});
      ++i;
    } else if (c == '<' || c == '>' || c == '=') {
      std::size_t len = 1;
      if (i + 1 < line.size() && (line[i + 1] == '=' || line[i + 1] == '<' || line[i + 1] == '>')) len = 2;
      const std::string op(line.substr(i, len));
      Tok kind;
      if (op == "<" || op == "<=" || op == "=<") {
        kind = Tok::le;
      } else if (op == ">" || op == ">=" || op == "=>") {
        kind = Tok::ge;
      } else if (op == "=" || op == "==") {
        kind = Tok::eq;
      } else {
        throw ParseError("unknown operator '" + op + "'", line_no);
      }
      out.push_back({kind, op, 0, line_no});
      i += len;
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(line.data() + i, line.data() + line.size(), v);
      if (ec != std::errc()) throw ParseError("malformed number", line_no);
      const auto len = static_cast<std::size_t>(ptr - (line.data() + i));
      out.push_back({Tok::number, std::string(line.substr(i, len)), v, line_no});
      i += len;
    } else {
      std::size_t j = i;
      while (j < line.size() && is_name_char(line[j])) ++j;
      const std::string name(line.substr(i, j - i));
      if (is_infinity(name)) {
        out.push_back({Tok::number, name, std::numeric_limits<double>::infinity(), line_no});
      } else {
        out.push_back({Tok::name, name, 0, line_no});
      }
      i = j;
    }
  }
}

std::optional<Section> section_keyword(std::string_view line) {
  const std::string l = lower(line);
  if (l == "maximize" || l == "maximise" || l == "maximum" || l == "max") return Section::objective;
  if (l == "minimize" || l == "minimise" || l == "minimum" || l == "min") return Section::none;
  if (l == "subject to" || l == "such that" || l == "st" || l == "s.t." || l == "st.") return Section::constraints;
  if (l == "bounds" || l == "bound") return Section::bounds;
  if (l == "binaries" || l == "binary" || l == "bin") return Section::binaries;
  if (l == "generals" || l == "general" || l == "gen") return Section::generals;
  if (l == "end") return Section::end;
  return std::nullopt;
}

struct LinearExpr {
  std::vector<std::pair<std::string, double>> terms;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  bool done() const { return pos_ >= toks_.size(); }
  const Token& peek(std::size_t ahead = 0) const {
    if (pos_ + ahead >= toks_.size()) throw ParseError("unexpected end of section", last_line());
    return toks_[pos_ + ahead];
  }
  bool has(std::size_t ahead) const { return pos_ + ahead < toks_.size(); }
  Token next() {
    const Token& t = peek();
    ++pos_;
    return t;
  }
  std::size_t last_line() const { return toks_.empty() ? 0 : toks_.back().line; }

  std::optional<std::string> label() {
    if (has(1) && peek().kind == Tok::name && peek(1).kind == Tok::colon) {
      std::string name = next().text;
      next();
      return name;
    }
    return std::nullopt;
  }

  // Reads terms until a comparison operator or the end of the token stream.
  LinearExpr expression(bool stop_at_end) {
    LinearExpr e;
    while (!done()) {
      const Tok k = peek().kind;
      if (k == Tok::le || k == Tok::ge || k == Tok::eq) break;
      if (stop_at_end && has(1) && k == Tok::name && peek(1).kind == Tok::colon) break;
      double sign = 1.0;
      while (!done() && (peek().kind == Tok::plus || peek().kind == Tok::minus)) {
        if (next().kind == Tok::minus) sign = -sign;
      }
      double coef = 1.0;
      const Token& t = peek();
      if (t.kind == Tok::number) {
        coef = next().value;
        if (done() || peek().kind != Tok::name) {
          // Bare constants are only tolerated when zero.
          if (coef == 0.0) continue;
          throw ParseError("constant terms are not supported", t.line);
        }
      }
      const Token& n = peek();
      if (n.kind != Tok::name) throw ParseError("expected a variable name, got '" + n.text + "'", n.line);
      e.terms.emplace_back(next().text, sign * coef);
    }
    return e;
  }

  double signed_number() {
    double sign = 1.0;
    while (!done() && (peek().kind == Tok::plus || peek().kind == Tok::minus)) {
      if (next().kind == Tok::minus) sign = -sign;
    }
    const Token t = next();
    if (t.kind != Tok::number) throw ParseError("expected a number, got '" + t.text + "'", t.line);
    return sign * t.value;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

struct Draft {
  std::vector<std::string> order;  // variable names in first-seen order
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<double> lower, upper;
  std::vector<bool> binary;

  std::size_t var(const std::string& name) {
    auto [it, fresh] = slot.emplace(name, order.size());
    if (fresh) {
      order.push_back(name);
      lower.push_back(0.0);
      upper.push_back(std::numeric_limits<double>::infinity());
      binary.push_back(false);
    }
    return it->second;
  }
};

void parse_meta(std::string_view comment, MioMetadata& meta, bool& seen, std::size_t line_no) {
  std::istringstream in{std::string(comment)};
  std::string word;
  in >> word;
  if (word != "meta") return;
  seen = true;
  while (in >> word) {
    const auto eq = word.find('=');
    if (eq == std::string::npos) throw ParseError("malformed meta field '" + word + "'", line_no);
    const std::string key = word.substr(0, eq);
    const std::string val = word.substr(eq + 1);
    try {
      if (key == "n") {
        meta.n = std::stoull(val);
      } else if (key == "p") {
        meta.p = std::stoull(val);
      } else if (key == "k") {
        meta.k = std::stoi(val);
      } else if (key == "depth") {
        meta.depth = std::stoi(val);
      } else if (key == "n_min") {
        meta.n_min = std::stoull(val);
      } else if (key == "objective") {
        meta.objective = parse_objective(val);
      }
    } catch (const ModelError&) {
      throw ParseError("unknown objective '" + val + "' in meta comment", line_no);
    } catch (const std::exception&) {
      throw ParseError("malformed meta field '" + word + "'", line_no);
    }
  }
}

}  // namespace

MioModel parse_lp(std::string_view text) {
  std::vector<Token> sections[7];
  Section current = Section::none;
  bool saw_objective = false;
  bool saw_end = false;
  bool saw_meta = false;
  MioMetadata meta;

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto stop = text.find('\n', start);
    if (stop == std::string_view::npos) stop = text.size();
    std::string_view line = text.substr(start, stop - start);
    start = stop + 1;
    ++line_no;
    if (const auto bs = line.find('\\'); bs != std::string_view::npos) {
      parse_meta(line.substr(bs + 1), meta, saw_meta, line_no);
      line = line.substr(0, bs);
    }
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string_view body = line.substr(first, last - first + 1);
    if (saw_end) throw ParseError("content after End", line_no);
    if (const auto s = section_keyword(body)) {
      if (*s == Section::none) throw ParseError("only maximization models are supported", line_no);
      if (*s == Section::objective) saw_objective = true;
      if (*s == Section::end) saw_end = true;
      current = *s;
      continue;
    }
    if (current == Section::none) throw ParseError("content before the objective section", line_no);
    tokenize(body, line_no, sections[static_cast<int>(current)]);
    if (current == Section::bounds) {
      // One bound per line; mark the boundary so the parser can split them.
      sections[static_cast<int>(current)].push_back({Tok::colon, "\n", 0, line_no});
    }
    if (start > text.size()) break;
  }
  if (!saw_objective) throw ParseError("missing Maximize section", line_no);
  if (!saw_end) throw ParseError("missing End", line_no);
  if (!saw_meta) throw ParseError("missing '\\ meta' header comment", 1);

  Draft draft;
  std::vector<std::pair<std::string, double>> objective;
  {
    Parser p(std::move(sections[static_cast<int>(Section::objective)]));
    p.label();
    auto e = p.expression(false);
    if (!p.done()) throw ParseError("unexpected '" + p.peek().text + "' in objective", p.peek().line);
    objective = std::move(e.terms);
    for (const auto& [name, coef] : objective) draft.var(name);
  }

  struct DraftRow {
    std::string id;
    std::vector<std::pair<std::string, double>> terms;
    Sense sense;
    double rhs;
    std::size_t line;
  };
  std::vector<DraftRow> rows;
  {
    Parser p(std::move(sections[static_cast<int>(Section::constraints)]));
    while (!p.done()) {
      const std::size_t line = p.peek().line;
      auto id = p.label();
      auto e = p.expression(true);
      if (p.done()) throw ParseError("constraint without a comparison operator", line);
      const Token op = p.next();
      Sense sense = op.kind == Tok::le ? Sense::le : op.kind == Tok::ge ? Sense::ge : Sense::eq;
      if (op.kind != Tok::le && op.kind != Tok::ge && op.kind != Tok::eq) {
        throw ParseError("expected a comparison operator", op.line);
      }
      const double rhs = p.signed_number();
      for (const auto& [name, coef] : e.terms) draft.var(name);
      rows.push_back({id ? *id : "R" + std::to_string(rows.size() + 1), std::move(e.terms), sense, rhs, line});
    }
  }

  {
    Parser p(std::move(sections[static_cast<int>(Section::bounds)]));
    while (!p.done()) {
      // Gather the tokens of one line.
      std::vector<Token> line;
      while (!p.done() && !(p.peek().kind == Tok::colon && p.peek().text == "\n")) line.push_back(p.next());
      if (!p.done()) p.next();
      if (line.empty()) continue;
      const std::size_t ln = line.front().line;
      auto num_at = [&](std::size_t& i) {
        double sign = 1.0;
        while (i < line.size() && (line[i].kind == Tok::plus || line[i].kind == Tok::minus)) {
          if (line[i].kind == Tok::minus) sign = -sign;
          ++i;
        }
        if (i >= line.size() || line[i].kind != Tok::number) throw ParseError("malformed bound", ln);
        return sign * line[i++].value;
      };
      std::size_t i = 0;
      if (line.size() == 2 && line[0].kind == Tok::name && line[1].kind == Tok::name && lower(line[1].text) == "free") {
        const auto v = draft.var(line[0].text);
        draft.lower[v] = -std::numeric_limits<double>::infinity();
        draft.upper[v] = std::numeric_limits<double>::infinity();
        continue;
      }
      if (line[0].kind == Tok::name) {
        // x <= hi | x >= lo | x = v
        const auto v = draft.var(line[0].text);
        i = 1;
        if (i >= line.size()) throw ParseError("malformed bound", ln);
        const Tok op = line[i++].kind;
        const double val = num_at(i);
        if (op == Tok::le) {
          draft.upper[v] = val;
        } else if (op == Tok::ge) {
          draft.lower[v] = val;
        } else if (op == Tok::eq) {
          draft.lower[v] = draft.upper[v] = val;
        } else {
          throw ParseError("malformed bound", ln);
        }
      } else {
        // lo <= x [<= hi]
        const double lo = num_at(i);
        if (i + 1 >= line.size() || line[i].kind != Tok::le || line[i + 1].kind != Tok::name) {
          throw ParseError("malformed bound", ln);
        }
        i += 1;
        const auto v = draft.var(line[i++].text);
        draft.lower[v] = lo;
        if (i < line.size()) {
          if (line[i++].kind != Tok::le) throw ParseError("malformed bound", ln);
          draft.upper[v] = num_at(i);
        }
      }
      if (i != line.size()) throw ParseError("trailing tokens in bound", ln);
    }
  }

  for (Section s : {Section::binaries, Section::generals}) {
    for (const Token& t : sections[static_cast<int>(s)]) {
      if (t.kind != Tok::name) throw ParseError("expected a variable name, got '" + t.text + "'", t.line);
      if (s == Section::generals) throw ParseError("general integer variables are not supported", t.line);
      draft.binary[draft.var(t.text)] = true;
    }
  }

  MioModel model;
  model.metadata = meta;
  for (std::size_t v = 0; v < draft.order.size(); ++v) {
    if (draft.binary[v]) {
      model.add_variable(draft.order[v], VarKind::binary, 0.0, 1.0);
    } else {
      model.add_variable(draft.order[v], VarKind::continuous, draft.lower[v], draft.upper[v]);
    }
  }
  auto to_terms = [&](const std::vector<std::pair<std::string, double>>& named, std::size_t line) {
    std::vector<Term> out;
    std::unordered_set<std::size_t> seen;
    out.reserve(named.size());
    for (const auto& [name, coef] : named) {
      const std::size_t idx = model.index(name);
      if (!seen.insert(idx).second) throw ParseError("variable '" + name + "' appears twice in one row", line);
      if (coef != 0.0) out.push_back(Term{idx, coef});
    }
    return out;
  };
  model.set_objective(to_terms(objective, 1));
  for (auto& r : rows) {
    try {
      model.add_constraint(LinearConstraint{r.id, to_terms(r.terms, r.line), r.sense, r.rhs});
    } catch (const ModelError& e) {
      throw ParseError(e.what(), r.line);
    }
  }
  return model;
}

}  // namespace minleaf
