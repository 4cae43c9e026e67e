#include "kg/compiler.hpp"

#include "embedded_patterns.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace kg {

using nlohmann::json;

std::string_view to_string(Confidence c) { return c == Confidence::Exact ? "exact" : "heuristic"; }

std::string_view to_string(LineStatus s) {
  switch (s) {
  case LineStatus::Matched:
    return "matched";
  case LineStatus::NotCalculation:
    return "not-calculation";
  case LineStatus::Unmatched:
    return "unmatched";
  }
  return "unmatched";
}

// ---------------------------------------------------------------------------
// Pattern table

namespace {

std::vector<std::string> string_list(const json& j, const char* key) {
  std::vector<std::string> out;
  for (const auto& v : j.at(key)) {
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::size_t word_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), ' ')) + 1; }

} // namespace

PatternTable PatternTable::parse(std::string_view json_text) {
  PatternTable t;
  try {
    const auto doc = json::parse(json_text);
    const auto& lex = doc.at("lexicon");
    t.verbs_ = string_list(lex, "verbs");
    t.connectives_ = string_list(lex, "connectives");
    t.unsupported_ = string_list(lex, "unsupported");
    std::set<std::string> all(t.verbs_.begin(), t.verbs_.end());
    all.insert(t.connectives_.begin(), t.connectives_.end());
    for (const auto& u : t.unsupported_) {
      if (!all.contains(u)) {
        throw std::runtime_error("unsupported term '" + u + "' is not in the lexicon");
      }
    }
    t.terms_by_length_.assign(all.begin(), all.end());
    std::stable_sort(t.terms_by_length_.begin(), t.terms_by_length_.end(),
                     [](const std::string& a, const std::string& b) { return word_count(a) > word_count(b); });

    for (const auto& p : doc.at("patterns")) {
      Pattern pat;
      pat.name = p.at("name").get<std::string>();
      pat.terms = string_list(p, "terms");
      for (const auto& term : pat.terms) {
        if (!all.contains(term)) {
          throw std::runtime_error("pattern " + pat.name + " uses unknown term '" + term + "'");
        }
      }
      pat.gist = p.at("gist").get<std::string>();
      const auto& ops = p.at("operands");
      if (ops.contains("exact")) {
        pat.operands.min = ops.at("exact").get<std::size_t>();
        pat.operands.max = pat.operands.min;
      } else {
        pat.operands.min = ops.at("min").get<std::size_t>();
        if (ops.contains("max")) {
          pat.operands.max = ops.at("max").get<std::size_t>();
        }
      }
      const auto& bind = p.at("bind");
      if (bind.is_object()) {
        for (const auto& [role, idx] : bind.items()) {
          pat.roles.emplace(role, idx.get<std::size_t>());
        }
      } else if (bind != "all") {
        throw std::runtime_error("pattern " + pat.name + ": bind must be \"all\" or an object");
      }
      if (p.contains("zero")) {
        pat.zero = p.at("zero").get<std::vector<std::size_t>>();
      }
      if (p.contains("same")) {
        for (const auto& pair : p.at("same")) {
          pat.same.emplace_back(pair.at(0).get<std::size_t>(), pair.at(1).get<std::size_t>());
        }
      }
      const auto conf = p.value("confidence", std::string("exact"));
      if (conf != "exact" && conf != "heuristic") {
        throw std::runtime_error("pattern " + pat.name + ": bad confidence '" + conf + "'");
      }
      pat.confidence = conf == "exact" ? Confidence::Exact : Confidence::Heuristic;
      t.patterns_.push_back(std::move(pat));
    }
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("invalid pattern table: ") + e.what());
  }
  return t;
}

PatternTable PatternTable::load(const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.string().c_str(), "rb");
  if (f == nullptr) {
    throw std::runtime_error("cannot read " + path.string());
  }
  std::string text;
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) {
    text.append(buf, n);
  }
  std::fclose(f);
  return parse(text);
}

const PatternTable& PatternTable::builtin() {
  static const PatternTable table = parse(detail::kInstructionPatternsJson);
  return table;
}

bool PatternTable::is_verb(std::string_view term) const {
  return std::find(verbs_.begin(), verbs_.end(), term) != verbs_.end();
}

bool PatternTable::is_unsupported(std::string_view term) const {
  return std::find(unsupported_.begin(), unsupported_.end(), term) != unsupported_.end();
}

// ---------------------------------------------------------------------------
// Tokenizer

namespace {

enum class Tok { Word, Number, Money, Percent, Zero, Comma, Other };

struct Token {
  Tok type;
  std::string text;
};

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) { return c >= 'a' && c <= 'z'; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

// Splits on '.' followed by whitespace or the end of text.
std::vector<std::string> sentences(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '.' && (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1])))) {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += text[i];
    }
  }
  if (!cur.empty()) {
    out.push_back(std::move(cur));
  }
  return out;
}

// Reads digits with embedded ',' or '.' followed by a digit.
std::string read_number(const std::string& s, std::size_t& i) {
  std::string out;
  while (i < s.size()) {
    if (is_digit(s[i])) {
      out += s[i++];
    } else if ((s[i] == ',' || s[i] == '.') && i + 1 < s.size() && is_digit(s[i + 1]) && !out.empty()) {
      if (s[i] == '.') {
        out += '.';
      }
      ++i;
    } else {
      break;
    }
  }
  return out;
}

std::vector<Token> tokenize(const std::string& s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (s.compare(i, 3, "-0-") == 0) {
      out.push_back({Tok::Zero, "0"});
      i += 3;
    } else if (c == '$' && i + 1 < s.size() && is_digit(s[i + 1])) {
      ++i;
      out.push_back({Tok::Money, read_number(s, i)});
    } else if (is_digit(c)) {
      auto num = read_number(s, i);
      if (i < s.size() && s[i] == '%') {
        ++i;
        out.push_back({Tok::Percent, num});
      } else if (num.find('.') == std::string::npos && i < s.size() && is_alpha(s[i])) {
        // Line ids such as "18a"; longer alphanumerics are plain words.
        std::string word = num;
        while (i < s.size() && (is_alpha(s[i]) || is_digit(s[i]))) {
          word += s[i++];
        }
        const bool line_id = word.size() == num.size() + 1;
        out.push_back({line_id ? Tok::Number : Tok::Word, word});
      } else {
        out.push_back({Tok::Number, num});
      }
    } else if (is_alpha(c)) {
      std::string word;
      while (i < s.size() && (is_alpha(s[i]) || is_digit(s[i]) || s[i] == '-' || s[i] == '\'')) {
        word += s[i++];
      }
      while (!word.empty() && (word.back() == '-' || word.back() == '\'')) {
        word.pop_back();
      }
      out.push_back({Tok::Word, word});
    } else if (c == ',') {
      out.push_back({Tok::Comma, ","});
      ++i;
    } else {
      out.push_back({Tok::Other, std::string(1, c)});
      ++i;
    }
  }
  return out;
}

bool is_line_id(const Token& t) {
  if (t.type != Tok::Number || t.text.find('.') != std::string::npos) {
    return false;
  }
  return true;
}

struct LineKey {
  std::string prefix; // "" or "SCH3." etc.
  long number = 0;
  std::string suffix;

  auto operator<=>(const LineKey&) const = default;
};

// Splits "SCH3.L14a" into {"SCH3.", 14, "a"}.
std::optional<LineKey> line_key(const FieldId& id) {
  const auto& s = id.str();
  const auto dot = s.rfind('.');
  const std::size_t start = dot == std::string::npos ? 0 : dot + 1;
  if (start >= s.size() || s[start] != 'L') {
    return std::nullopt;
  }
  std::size_t i = start + 1;
  long n = 0;
  bool any = false;
  while (i < s.size() && is_digit(s[i])) {
    n = n * 10 + (s[i] - '0');
    ++i;
    any = true;
  }
  if (!any || n > 1000000) {
    return std::nullopt;
  }
  const auto suffix = s.substr(i);
  if (!std::all_of(suffix.begin(), suffix.end(), [](char c) { return is_alpha(c); })) {
    return std::nullopt;
  }
  return LineKey{s.substr(0, start), n, suffix};
}

std::string upper(std::string s) {
  for (auto& c : s) {
    c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return s;
}

class Extractor {
public:
  Extractor(const InstructionLine& line, std::span<const FieldDecl> fields, const PatternTable& patterns)
      : line_(line), fields_(fields), patterns_(patterns) {
    for (const auto& f : fields) {
      declared_.insert(f.id);
    }
  }

  std::variant<TermSet, Unmatched> run() {
    bool any_verb = false;
    for (const auto& sentence : sentences(lower(line_.text))) {
      const auto tokens = tokenize(sentence);
      const auto terms = sentence_terms(tokens);
      if (std::none_of(terms.begin(), terms.end(), [&](const auto& t) { return patterns_.is_verb(t.second); })) {
        continue;
      }
      any_verb = true;
      scan(tokens, terms);
      if (failure_) {
        return *failure_;
      }
    }
    if (!any_verb) {
      return Unmatched{std::string(reasons::kNoOperationTerm), ""};
    }
    auto out = resolve_own(line_.line);
    if (!out) {
      return Unmatched{std::string(reasons::kUnresolvedReference), "line " + line_.line + " is not declared"};
    }
    terms_.output = *out;
    return terms_;
  }

private:
  // Lexicon terms by token position.
  std::map<std::size_t, std::string> sentence_terms(const std::vector<Token>& tokens) const {
    std::map<std::size_t, std::string> out;
    for (std::size_t i = 0; i < tokens.size();) {
      bool hit = false;
      for (const auto& term : patterns_.terms_by_length()) {
        std::istringstream words(term);
        std::string w;
        std::size_t j = i;
        bool ok = true;
        while (words >> w) {
          if (j >= tokens.size() || tokens[j].type != Tok::Word || tokens[j].text != w) {
            ok = false;
            break;
          }
          ++j;
        }
        if (ok) {
          out.emplace(i, term);
          i = j;
          hit = true;
          break;
        }
      }
      if (!hit) {
        ++i;
      }
    }
    return out;
  }

  bool word_at(const std::vector<Token>& t, std::size_t i, std::initializer_list<std::string_view> words) const {
    if (i >= t.size() || t[i].type != Tok::Word) {
      return false;
    }
    return std::find(words.begin(), words.end(), t[i].text) != words.end();
  }

  void scan(const std::vector<Token>& t, const std::map<std::size_t, std::string>& terms) {
    std::size_t i = 0;
    while (i < t.size() && !failure_) {
      if (auto it = terms.find(i); it != terms.end()) {
        terms_.operation_terms.push_back(it->second);
        i += word_count(it->second);
        continue;
      }
      const auto& tok = t[i];
      if (word_at(t, i, {"line", "lines"}) && i + 1 < t.size() && is_line_id(t[i + 1])) {
        i = line_list(t, i + 1, std::nullopt);
      } else if (word_at(t, i, {"schedule", "form"}) && i + 1 < t.size() &&
                 (t[i + 1].type == Tok::Number || t[i + 1].type == Tok::Word)) {
        std::size_t j = i + 2;
        if (j < t.size() && t[j].type == Tok::Comma) {
          ++j;
        }
        if (word_at(t, j, {"line", "lines"}) && j + 1 < t.size() && is_line_id(t[j + 1])) {
          const std::string form = (tok.text == "schedule" ? "SCH" : "F") + upper(t[i + 1].text);
          i = line_list(t, j + 1, form);
        } else {
          i += 2;
        }
      } else if (tok.type == Tok::Money) {
        constant(tok.text, ValueKind::Money, 0);
        ++i;
      } else if (tok.type == Tok::Percent) {
        constant(tok.text, ValueKind::Number, 2);
        ++i;
      } else if (tok.type == Tok::Zero) {
        constant("0", ValueKind::Number, 0);
        ++i;
      } else if (tok.type == Tok::Number &&
                 (tok.text.find('.') != std::string::npos || (i > 0 && word_at(t, i - 1, {"by", "times"})))) {
        constant(tok.text, ValueKind::Number, 0);
        ++i;
      } else {
        ++i;
      }
    }
  }

  void constant(const std::string& digits, ValueKind kind, int shift) {
    auto d = Decimal::parse(digits, 18);
    std::optional<Value> v;
    if (d) {
      v = assign_numeric(Decimal(d->mantissa(), d->scale() + shift), kind);
    }
    if (!v) {
      failure_ = Unmatched{std::string(reasons::kAmbiguousOperands), "constant '" + digits + "' out of range"};
      return;
    }
    terms_.constants.push_back(*v);
    terms_.operands.emplace_back(*v);
  }

  // Parses "17", "17 and 18e", "18a through 18d", "1, 2, and 3", "3 or line 4".
  std::size_t line_list(const std::vector<Token>& t, std::size_t i, const std::optional<std::string>& form) {
    std::optional<FieldId> last = reference(t[i].text, form);
    if (!last) {
      return t.size();
    }
    add_ref(*last);
    ++i;
    while (i < t.size()) {
      std::size_t j = i;
      if (t[j].type == Tok::Comma) {
        ++j;
      }
      bool through = false;
      if (word_at(t, j, {"and", "or", "through"})) {
        through = t[j].text == "through";
        ++j;
      }
      if (word_at(t, j, {"line", "lines"})) {
        ++j;
      }
      if (j == i || j >= t.size() || !is_line_id(t[j])) {
        break;
      }
      auto next = reference(t[j].text, form);
      if (!next) {
        return t.size();
      }
      if (through) {
        if (!expand_range(*last, *next)) {
          return t.size();
        }
      } else {
        add_ref(*next);
      }
      last = next;
      i = j + 1;
    }
    return i;
  }

  void add_ref(const FieldId& id) {
    terms_.input_refs.push_back(id);
    terms_.operands.emplace_back(id);
  }

  std::optional<FieldId> resolve_own(const std::string& line) const {
    for (const auto& candidate : {line_.form + ".L" + line, "L" + line}) {
      if (FieldId::is_valid_token(candidate) && declared_.contains(FieldId(candidate))) {
        return FieldId(candidate);
      }
    }
    return std::nullopt;
  }

  std::optional<FieldId> reference(const std::string& line, const std::optional<std::string>& form) {
    std::optional<FieldId> id;
    if (form) {
      const auto candidate = *form + ".L" + line;
      if (FieldId::is_valid_token(candidate) && declared_.contains(FieldId(candidate))) {
        id = FieldId(candidate);
      }
    } else {
      id = resolve_own(line);
    }
    if (!id) {
      const auto shown = form ? *form + ", line " + line : "line " + line;
      failure_ = Unmatched{std::string(reasons::kUnresolvedReference), shown + " is not declared"};
    }
    return id;
  }

  // Replaces the already-added `from` with every declared line in [from, to].
  bool expand_range(const FieldId& from, const FieldId& to) {
    const auto a = line_key(from);
    const auto b = line_key(to);
    if (!a || !b || a->prefix != b->prefix || !(*a < *b)) {
      failure_ = Unmatched{std::string(reasons::kInvalidRange), from.str() + " through " + to.str()};
      return false;
    }
    terms_.ranges.push_back({from, to});
    std::vector<std::pair<LineKey, FieldId>> members;
    for (const auto& f : fields_) {
      if (auto k = line_key(f.id); k && k->prefix == a->prefix && !(*k < *a) && !(*b < *k)) {
        members.emplace_back(*k, f.id);
      }
    }
    std::sort(members.begin(), members.end());
    terms_.input_refs.pop_back();
    terms_.operands.pop_back();
    for (const auto& [_, id] : members) {
      add_ref(id);
    }
    return true;
  }

  const InstructionLine& line_;
  std::span<const FieldDecl> fields_;
  const PatternTable& patterns_;
  std::unordered_set<FieldId> declared_;
  TermSet terms_;
  std::optional<Unmatched> failure_;
};

} // namespace

std::variant<TermSet, Unmatched> extract_terms(const InstructionLine& line, std::span<const FieldDecl> fields,
                                               const PatternTable& patterns) {
  return Extractor(line, fields, patterns).run();
}

// ---------------------------------------------------------------------------
// Matching

CompileOutcome match_gist(const TermSet& terms, const GistRegistry& registry, const PatternTable& patterns) {
  for (const auto& term : terms.operation_terms) {
    if (patterns.is_unsupported(term)) {
      return Unmatched{std::string(reasons::kUnknownOperation), "'" + term + "' has no pattern"};
    }
  }
  const auto it = std::find_if(patterns.patterns().begin(), patterns.patterns().end(),
                               [&](const PatternTable::Pattern& p) { return p.terms == terms.operation_terms; });
  if (it == patterns.patterns().end()) {
    std::string joined;
    for (const auto& t : terms.operation_terms) {
      joined += (joined.empty() ? "" : ", ") + t;
    }
    return Unmatched{std::string(reasons::kUnknownOperation), "no pattern for terms [" + joined + "]"};
  }
  const auto& pat = *it;
  const auto& ops = terms.operands;
  const auto ambiguous = [&](const std::string& why) {
    return Unmatched{std::string(reasons::kAmbiguousOperands), pat.name + ": " + why};
  };
  if (ops.size() < pat.operands.min || (pat.operands.max && ops.size() > *pat.operands.max)) {
    return ambiguous(std::to_string(ops.size()) + " operands");
  }
  for (auto z : pat.zero) {
    const auto* v = z < ops.size() ? std::get_if<Value>(&ops[z]) : nullptr;
    if (v == nullptr || !v->is_numeric() || !v->as_decimal().is_zero()) {
      return ambiguous("operand " + std::to_string(z + 1) + " should be zero");
    }
  }
  for (const auto& [a, b] : pat.same) {
    if (a >= ops.size() || b >= ops.size() || ops[a] != ops[b]) {
      return ambiguous("operands do not repeat as expected");
    }
  }
  const auto* spec = registry.find(pat.gist);
  if (spec == nullptr) {
    return Unmatched{std::string(reasons::kUnknownOperation), "gist " + pat.gist + " is not registered"};
  }

  Matched m;
  m.gist = pat.gist;
  m.pattern = pat.name;
  m.confidence = pat.confidence;
  m.model.id = "calc." + terms.output.str();
  m.model.gist = pat.gist;
  m.model.output = terms.output;
  if (pat.roles.empty()) {
    for (const auto& op : ops) {
      m.model.inputs.push_back(Binding{"", op, {}});
    }
  } else {
    for (const auto& role : spec->roles) {
      auto r = pat.roles.find(role);
      if (r == pat.roles.end() || r->second >= ops.size()) {
        return ambiguous("role " + role + " is not bound");
      }
      m.model.inputs.push_back(Binding{role, ops[r->second], {}});
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Form compilation

std::optional<double> CompileResult::automation_rate() const {
  if (matched + unmatched == 0) {
    return std::nullopt;
  }
  return static_cast<double>(matched) / static_cast<double>(matched + unmatched);
}

CompileResult compile_form(const std::vector<InstructionLine>& lines, std::span<const FieldDecl> fields,
                           const GistRegistry& registry, const PatternTable& patterns) {
  CompileResult result;
  std::unordered_map<FieldId, const FieldDecl*> field_map;
  for (const auto& f : fields) {
    field_map.emplace(f.id, &f);
  }

  for (const auto& line : lines) {
    LineResult lr;
    lr.line = line;
    auto terms = extract_terms(line, fields, patterns);
    if (auto* u = std::get_if<Unmatched>(&terms)) {
      lr.status = u->reason == reasons::kNoOperationTerm ? LineStatus::NotCalculation : LineStatus::Unmatched;
      lr.unmatched = *u;
    } else {
      auto outcome = match_gist(std::get<TermSet>(terms), registry, patterns);
      if (auto* u2 = std::get_if<Unmatched>(&outcome)) {
        lr.status = LineStatus::Unmatched;
        lr.unmatched = *u2;
      } else {
        auto& m = std::get<Matched>(outcome);
        // Check the model as if its output were computed.
        auto local = field_map;
        FieldDecl out_decl = *field_map.at(m.model.output);
        out_decl.role = FieldRole::Computed;
        local[m.model.output] = &out_decl;
        const auto diags = check_model(m.model, registry, FunctionTable::standard(), local);
        auto err = std::find_if(diags.begin(), diags.end(),
                                [](const Diagnostic& d) { return d.severity == Severity::Error; });
        if (err != diags.end()) {
          lr.status = LineStatus::Unmatched;
          lr.unmatched = Unmatched{std::string(err->code == codes::kKindMismatch ? reasons::kKindMismatch
                                                                                 : reasons::kRejectedByValidation),
                                   err->message};
        } else {
          lr.status = LineStatus::Matched;
          lr.matched = std::move(m);
        }
      }
    }
    result.lines.push_back(std::move(lr));
  }

  // Assemble the fragment; demote the implicated model with the largest id
  // until the whole fragment validates.
  for (;;) {
    GraphDefinition def;
    std::set<FieldId> outputs;
    for (const auto& lr : result.lines) {
      if (lr.matched) {
        outputs.insert(lr.matched->model.output);
        def.calcs.push_back(lr.matched->model);
      }
    }
    for (const auto& f : fields) {
      FieldDecl d = f;
      d.role = outputs.contains(d.id) ? FieldRole::Computed : FieldRole::Input;
      if (d.role == FieldRole::Computed) {
        d.default_value.reset();
      }
      def.fields.push_back(std::move(d));
    }
    const auto diags = validate(def, registry);
    std::optional<std::size_t> victim;
    std::string why;
    for (const auto& d : diags) {
      if (d.severity != Severity::Error) {
        continue;
      }
      for (std::size_t i = 0; i < result.lines.size(); ++i) {
        const auto& m = result.lines[i].matched;
        if (!m) {
          continue;
        }
        const bool implicated =
            std::any_of(d.subjects.begin(), d.subjects.end(),
                        [&](const std::string& s) { return s == m->model.id || s == m->model.output.str(); });
        if (implicated &&
            (!victim || std::tie(m->model.id, i) > std::tie(result.lines[*victim].matched->model.id, *victim))) {
          victim = i;
          why = d.message;
        }
      }
    }
    if (!victim) {
      result.fragment = std::move(def);
      break;
    }
    auto& lr = result.lines[*victim];
    lr.matched.reset();
    lr.status = LineStatus::Unmatched;
    lr.unmatched = Unmatched{std::string(reasons::kRejectedByValidation), why};
  }

  for (const auto& lr : result.lines) {
    switch (lr.status) {
    case LineStatus::Matched:
      ++result.matched;
      break;
    case LineStatus::Unmatched:
      ++result.unmatched;
      break;
    case LineStatus::NotCalculation:
      ++result.not_calculation;
      break;
    }
  }
  return result;
}

std::vector<InstructionLine> parse_corpus_tsv(std::string_view text) {
  std::vector<InstructionLine> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    auto row = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!row.empty() && row.back() == '\r') {
      row.remove_suffix(1);
    }
    if (row.empty() || row.front() == '#') {
      continue;
    }
    const auto t1 = row.find('\t');
    const auto t2 = t1 == std::string_view::npos ? t1 : row.find('\t', t1 + 1);
    if (t2 == std::string_view::npos) {
      throw std::runtime_error("corpus line " + std::to_string(line_no) + ": expected form<TAB>line<TAB>text");
    }
    InstructionLine il{std::string(row.substr(0, t1)), std::string(row.substr(t1 + 1, t2 - t1 - 1)),
                       std::string(row.substr(t2 + 1))};
    if (il.line.empty() || il.text.empty()) {
      throw std::runtime_error("corpus line " + std::to_string(line_no) + ": empty line id or text");
    }
    out.push_back(std::move(il));
  }
  return out;
}

std::string format_rate(const std::optional<double>& rate) {
  if (!rate) {
    return "n/a";
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *rate);
  return buf;
}

namespace {

std::string operand_text(const Operand& op) {
  if (const auto* f = std::get_if<FieldId>(&op)) {
    return f->str();
  }
  return std::get<Value>(op).to_string();
}

} // namespace

std::string report_json(const CompileResult& result) {
  json lines = json::array();
  for (const auto& lr : result.lines) {
    json j{{"form", lr.line.form}, {"line", lr.line.line}, {"status", std::string(to_string(lr.status))}};
    if (lr.matched) {
      const auto& m = *lr.matched;
      json inputs = json::array();
      for (const auto& b : m.model.inputs) {
        json in{{"source", operand_text(b.source)}, {"kind", b.field() ? "ref" : "const"}};
        if (!b.role.empty()) {
          in["role"] = b.role;
        }
        inputs.push_back(std::move(in));
      }
      j["model"] = m.model.id;
      j["gist"] = m.gist;
      j["pattern"] = m.pattern;
      j["confidence"] = std::string(to_string(m.confidence));
      j["output"] = m.model.output.str();
      j["inputs"] = std::move(inputs);
    }
    if (lr.unmatched) {
      j["reason"] = lr.unmatched->reason;
      if (!lr.unmatched->detail.empty()) {
        j["detail"] = lr.unmatched->detail;
      }
    }
    lines.push_back(std::move(j));
  }
  json doc{{"matched", result.matched},
           {"unmatched", result.unmatched},
           {"not_calculation", result.not_calculation},
           {"automation_rate", format_rate(result.automation_rate())},
           {"lines", std::move(lines)}};
  return doc.dump(2) + "\n";
}

std::string report_table(const CompileResult& result) {
  std::ostringstream os;
  char buf[512];
  std::snprintf(buf, sizeof buf, "%-8s %-6s %-16s %s\n", "FORM", "LINE", "STATUS", "DETAIL");
  os << buf;
  for (const auto& lr : result.lines) {
    std::string detail;
    if (lr.matched) {
      detail = lr.matched->gist + "(";
      for (std::size_t i = 0; i < lr.matched->model.inputs.size(); ++i) {
        detail += (i ? ", " : "") + operand_text(lr.matched->model.inputs[i].source);
      }
      detail += ") -> " + lr.matched->model.output.str();
      if (lr.matched->confidence == Confidence::Heuristic) {
        detail += " [heuristic]";
      }
    } else if (lr.unmatched) {
      detail = lr.unmatched->reason;
      if (!lr.unmatched->detail.empty()) {
        detail += ": " + lr.unmatched->detail;
      }
    }
    std::snprintf(buf, sizeof buf, "%-8s %-6s %-16s ", lr.line.form.c_str(), lr.line.line.c_str(),
                  std::string(to_string(lr.status)).c_str());
    os << buf << detail << '\n';
  }
  os << "\nmatched " << result.matched << ", unmatched " << result.unmatched << ", not a calculation "
     << result.not_calculation << "\nautomation rate: " << format_rate(result.automation_rate()) << '\n';
  return os.str();
}

} // namespace kg
