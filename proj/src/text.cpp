#include "obfuskit/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

#include "obfuskit/error.hpp"

namespace obfuskit::text {

extern const char* const kBuiltinLexiconTsv;

namespace {

constexpr std::array<std::pair<Tag, std::string_view>, 11> kTagNames{{
    {Tag::Noun, "NOUN"},
    {Tag::Verb, "VERB"},
    {Tag::Adj, "ADJ"},
    {Tag::Adv, "ADV"},
    {Tag::Det, "DET"},
    {Tag::Pron, "PRON"},
    {Tag::Prep, "PREP"},
    {Tag::Conj, "CONJ"},
    {Tag::Num, "NUM"},
    {Tag::Punct, "PUNCT"},
    {Tag::Other, "OTHER"},
}};

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() > suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool is_numeric(std::string_view s) {
  bool digit = false;
  for (char c : s) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digit = true;
    } else if (c != '.' && c != ',' && c != '%') {
      return false;
    }
  }
  return digit;
}

std::optional<Tag> suffix_tag(std::string_view w) {
  if (w.size() < 5) return std::nullopt;
  struct Rule {
    std::string_view suffix;
    Tag tag;
  };
  static constexpr std::array<Rule, 22> kRules{{
      {"ly", Tag::Adv},      {"ing", Tag::Verb},   {"ed", Tag::Verb},
      {"ize", Tag::Verb},    {"ise", Tag::Verb},   {"ify", Tag::Verb},
      {"tion", Tag::Noun},   {"sion", Tag::Noun},  {"ness", Tag::Noun},
      {"ment", Tag::Noun},   {"ity", Tag::Noun},   {"ism", Tag::Noun},
      {"ship", Tag::Noun},   {"hood", Tag::Noun},  {"ance", Tag::Noun},
      {"ence", Tag::Noun},   {"ous", Tag::Adj},    {"ful", Tag::Adj},
      {"ive", Tag::Adj},     {"able", Tag::Adj},   {"ible", Tag::Adj},
      {"less", Tag::Adj},
  }};
  for (const auto& r : kRules) {
    if (ends_with(w, r.suffix)) return r.tag;
  }
  return std::nullopt;
}

bool is_opening(const std::string& w) { return w == "(" || w == "[" || w == "{"; }

bool is_closing(const std::string& w) {
  static constexpr std::string_view kClosing = ",.;:!?)]}";
  return w.size() == 1 && kClosing.find(w[0]) != std::string_view::npos;
}

std::size_t match_np(std::span<const Token> t, std::size_t i) {
  if (i >= t.size()) return 0;
  if (t[i].tag == Tag::Pron) return 1;
  std::size_t j = i;
  if (t[j].tag == Tag::Det) ++j;
  if (j < t.size() && t[j].tag == Tag::Num) ++j;
  while (j < t.size() && t[j].tag == Tag::Adj) ++j;
  if (j >= t.size() || t[j].tag != Tag::Noun) return 0;
  while (j < t.size() && t[j].tag == Tag::Noun) ++j;
  return j - i;
}

std::size_t match_vp(std::span<const Token> t, std::size_t i) {
  std::size_t j = i;
  while (j < t.size() && t[j].tag == Tag::Adv) ++j;
  if (j >= t.size() || t[j].tag != Tag::Verb) return 0;
  while (j < t.size() && t[j].tag == Tag::Verb) ++j;
  while (j < t.size() && t[j].tag == Tag::Adv) ++j;
  return j - i;
}

}  // namespace

std::string_view tag_name(Tag tag) {
  for (const auto& [t, name] : kTagNames) {
    if (t == tag) return name;
  }
  return "OTHER";
}

std::optional<Tag> parse_tag(std::string_view name) {
  for (const auto& [t, n] : kTagNames) {
    if (n == name) return t;
  }
  return std::nullopt;
}

std::string_view label_name(ChunkLabel label) {
  switch (label) {
    case ChunkLabel::NP: return "NP";
    case ChunkLabel::VP: return "VP";
    case ChunkLabel::PP: return "PP";
    case ChunkLabel::Clause: return "CLAUSE";
    case ChunkLabel::Frag: return "FRAG";
  }
  return "FRAG";
}

std::vector<Token> SyntaxTree::leaves() const {
  std::vector<Token> out;
  for (const auto& c : chunks) out.insert(out.end(), c.leaves.begin(), c.leaves.end());
  return out;
}

std::string TreeString::str() const {
  std::string out;
  for (const auto& s : symbols) {
    if (!out.empty()) out += ' ';
    out += s;
  }
  return out;
}

Lexicon Lexicon::from_tsv(std::string_view contents) {
  Lexicon lex;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= contents.size()) {
    std::size_t end = contents.find('\n', pos);
    if (end == std::string_view::npos) end = contents.size();
    std::string_view line = contents.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw Error(ErrorCode::InvalidConfig, "lexicon line " + std::to_string(line_no) + ": missing TAB");
    }
    const auto tag = parse_tag(line.substr(tab + 1));
    if (!tag) {
      throw Error(ErrorCode::InvalidConfig, "lexicon line " + std::to_string(line_no) + ": unknown tag");
    }
    lex.entries_[to_lower(line.substr(0, tab))] = *tag;
  }
  return lex;
}

Lexicon Lexicon::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open lexicon " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_tsv(ss.str());
}

const Lexicon& Lexicon::builtin() {
  static const Lexicon lex = from_tsv(kBuiltinLexiconTsv);
  return lex;
}

std::optional<Tag> Lexicon::lookup(std::string_view word) const {
  const auto it = entries_.find(to_lower(word));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

Tag Lexicon::tag_word(std::string_view surface) const {
  if (surface.size() == 1 && is_punct_char(surface[0])) return Tag::Punct;
  const std::string lower = to_lower(surface);
  if (auto hit = entries_.find(lower); hit != entries_.end()) return hit->second;
  if (is_numeric(lower)) return Tag::Num;
  if (auto t = suffix_tag(lower)) return *t;
  return Tag::Other;
}

bool is_punct_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u) && c != '\'' && c != '-' && c != '_';
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> split_surfaces(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j == i) break;
    std::string_view chunk = text.substr(i, j - i);
    i = j;

    std::size_t lead = 0;
    while (lead < chunk.size() && is_punct_char(chunk[lead])) ++lead;
    if (lead == chunk.size()) {
      for (char c : chunk) out.emplace_back(1, c);
      continue;
    }
    std::size_t trail = chunk.size();
    while (trail > lead && is_punct_char(chunk[trail - 1])) --trail;
    for (std::size_t k = 0; k < lead; ++k) out.emplace_back(1, chunk[k]);
    out.emplace_back(chunk.substr(lead, trail - lead));
    for (std::size_t k = trail; k < chunk.size(); ++k) out.emplace_back(1, chunk[k]);
  }
  return out;
}

std::vector<Token> tokenize(std::string_view text, const Lexicon& lexicon) {
  std::vector<Token> out;
  for (auto& s : split_surfaces(text)) {
    const Tag tag = lexicon.tag_word(s);
    out.push_back(Token{std::move(s), tag});
  }
  return out;
}

std::string render_words(std::span<const std::string> words) {
  std::string out;
  bool glue_next = true;
  bool in_quote = false;
  for (const auto& w : words) {
    // A bare double quote opens and closes alternately.
    const bool quote = w == "\"";
    const bool closing = quote ? in_quote : is_closing(w);
    if (!glue_next && !closing) out += ' ';
    out += w;
    glue_next = quote ? !in_quote : is_opening(w);
    if (quote) in_quote = !in_quote;
  }
  return out;
}

std::string normalize_text(std::string_view text) {
  std::string out;
  for (const auto& s : split_surfaces(text)) {
    if (s.size() == 1 && is_punct_char(s[0])) continue;
    if (!out.empty()) out += ' ';
    out += to_lower(s);
  }
  return out;
}

SyntaxTree ChunkParser::parse(std::span<const Token> t) const {
  if (t.empty()) throw Error(ErrorCode::EmptyInput, "parse_shallow: no tokens");
  SyntaxTree tree;
  std::vector<Token> frag;
  auto flush = [&] {
    if (frag.empty()) return;
    tree.chunks.push_back(Chunk{ChunkLabel::Frag, std::move(frag)});
    frag.clear();
  };
  auto emit = [&](ChunkLabel label, std::size_t from, std::size_t len) {
    flush();
    tree.chunks.push_back(Chunk{label, std::vector<Token>(t.begin() + from, t.begin() + from + len)});
  };

  std::size_t i = 0;
  while (i < t.size()) {
    const Tag tag = t[i].tag;
    if (tag == Tag::Punct || tag == Tag::Conj) {
      emit(ChunkLabel::Clause, i, 1);
      ++i;
    } else if (auto np = match_np(t, i)) {
      emit(ChunkLabel::NP, i, np);
      i += np;
    } else if (auto vp = match_vp(t, i)) {
      emit(ChunkLabel::VP, i, vp);
      i += vp;
    } else if (tag == Tag::Prep && match_np(t, i + 1) > 0) {
      const auto len = 1 + match_np(t, i + 1);
      emit(ChunkLabel::PP, i, len);
      i += len;
    } else {
      frag.push_back(t[i]);
      ++i;
    }
  }
  flush();
  return tree;
}

SyntaxTree parse_shallow(std::span<const Token> tokens) { return ChunkParser{}.parse(tokens); }

TreeString serialize_tree(const SyntaxTree& tree) {
  TreeString ts;
  ts.symbols.reserve(3 + tree.chunks.size() * 4);
  ts.symbols.emplace_back("(");
  ts.symbols.emplace_back("ROOT");
  for (const auto& c : tree.chunks) {
    ts.symbols.emplace_back("(");
    ts.symbols.emplace_back(label_name(c.label));
    for (const auto& leaf : c.leaves) ts.symbols.emplace_back(tag_name(leaf.tag));
    ts.symbols.emplace_back(")");
  }
  ts.symbols.emplace_back(")");
  return ts;
}

TextModel::TextModel() : TextModel(Lexicon::builtin(), std::make_shared<ChunkParser>()) {}

TextModel::TextModel(Lexicon lexicon, std::shared_ptr<const SentenceParser> parser)
    : lexicon_(std::move(lexicon)), parser_(std::move(parser)) {}

const TextModel& TextModel::default_model() {
  static const TextModel model;
  return model;
}

SyntaxTree TextModel::tree(std::string_view text) const {
  const auto toks = tokens(text);
  if (toks.empty()) throw Error(ErrorCode::EmptyInput, "empty sentence");
  return parser_->parse(toks);
}

TreeString TextModel::tree_string(std::string_view text) const { return serialize_tree(tree(text)); }

}  // namespace obfuskit::text
