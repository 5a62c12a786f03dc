#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace obfuskit::text {

// Closed part-of-speech set. Unknown words are OTHER, never untagged.
enum class Tag { Noun, Verb, Adj, Adv, Det, Pron, Prep, Conj, Num, Punct, Other };

enum class ChunkLabel { NP, VP, PP, Clause, Frag };

std::string_view tag_name(Tag tag);
std::optional<Tag> parse_tag(std::string_view name);
std::string_view label_name(ChunkLabel label);

struct Token {
  std::string surface;
  Tag tag = Tag::Other;

  bool operator==(const Token&) const = default;
};

struct Chunk {
  ChunkLabel label = ChunkLabel::Frag;
  std::vector<Token> leaves;

  bool operator==(const Chunk&) const = default;
};

// ROOT is implicit: a tree is the ordered list of ROOT's chunk children.
struct SyntaxTree {
  std::vector<Chunk> chunks;

  std::vector<Token> leaves() const;
  std::size_t depth() const { return chunks.empty() ? 1 : 2; }

  bool operator==(const SyntaxTree&) const = default;
};

// Pre-order serialization over whole-label symbols, e.g.
// "( ROOT ( NP DET NOUN ) )".
struct TreeString {
  std::vector<std::string> symbols;

  std::string str() const;
  std::size_t size() const { return symbols.size(); }

  bool operator==(const TreeString&) const = default;
};

// word<TAB>TAG table with suffix heuristics for words it does not list.
class Lexicon {
 public:
  Lexicon() = default;

  static Lexicon from_tsv(std::string_view contents);
  static Lexicon from_file(const std::string& path);
  // The table shipped in data/lexicon.tsv, compiled in.
  static const Lexicon& builtin();

  std::optional<Tag> lookup(std::string_view word) const;
  // Case-insensitive; falls back to numeric/suffix rules, then OTHER.
  Tag tag_word(std::string_view surface) const;

  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, Tag> entries_;
};

bool is_punct_char(char c);
std::string to_lower(std::string_view s);

// Whitespace split, with leading/trailing punctuation peeled into
// single-character tokens. Word-internal punctuation is kept.
std::vector<std::string> split_surfaces(std::string_view text);

std::vector<Token> tokenize(std::string_view text, const Lexicon& lexicon = Lexicon::builtin());

// Joins word surfaces with single spaces, attaching closing punctuation to
// the preceding word and opening brackets to the following one.
std::string render_words(std::span<const std::string> words);

// Lower-cased non-punctuation surfaces joined by single spaces.
std::string normalize_text(std::string_view text);

class SentenceParser {
 public:
  virtual ~SentenceParser() = default;
  virtual SyntaxTree parse(std::span<const Token> tokens) const = 0;
};

// Fixed chunking cascade, applied greedily left to right:
//   PUNCT | CONJ                    -> CLAUSE (one token, clause boundary)
//   PRON | DET? NUM? ADJ* NOUN+     -> NP
//   ADV* VERB+ ADV*                 -> VP
//   PREP NP                         -> PP
//   anything else, merged per run   -> FRAG
class ChunkParser final : public SentenceParser {
 public:
  SyntaxTree parse(std::span<const Token> tokens) const override;
};

SyntaxTree parse_shallow(std::span<const Token> tokens);
TreeString serialize_tree(const SyntaxTree& tree);

// Lexicon + parser bundle used by the metrics and the simulator.
class TextModel {
 public:
  TextModel();
  TextModel(Lexicon lexicon, std::shared_ptr<const SentenceParser> parser);

  static const TextModel& default_model();

  std::vector<Token> tokens(std::string_view text) const { return tokenize(text, lexicon_); }
  SyntaxTree tree(std::string_view text) const;
  TreeString tree_string(std::string_view text) const;
  const Lexicon& lexicon() const { return lexicon_; }

 private:
  Lexicon lexicon_;
  std::shared_ptr<const SentenceParser> parser_;
};

}  // namespace obfuskit::text
