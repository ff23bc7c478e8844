#include "pvae/data/synthetic.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "pvae/data/tokenize.hpp"
#include "pvae/errors.hpp"

namespace pvae::data {
namespace {

const std::vector<std::string> kAdjectives = {
    "red",   "small", "old",    "young", "happy", "quiet", "tall",  "brave", "clever", "lazy",
    "angry", "shy",   "gentle", "proud", "tired", "eager", "noisy", "calm",  "wild",   "polite"};

const std::vector<std::string> kNouns = {
    "dog",    "cat",   "farmer", "teacher", "child", "horse",  "doctor", "bird",   "girl",
    "boy",    "chef",  "pilot",  "singer",  "fox",   "rabbit", "artist", "sailor", "queen",
    "monkey", "baker", "nurse",  "driver",  "tiger", "clown",  "lawyer"};

struct VerbForms {
  const char* present;
  const char* participle;
};

const std::vector<VerbForms> kVerbs = {
    {"chases", "chased"},   {"sees", "seen"},         {"helps", "helped"},   {"follows", "followed"},
    {"feeds", "fed"},       {"paints", "painted"},    {"calls", "called"},   {"watches", "watched"},
    {"greets", "greeted"},  {"pushes", "pushed"},     {"hugs", "hugged"},    {"carries", "carried"},
    {"teaches", "taught"},  {"thanks", "thanked"},    {"visits", "visited"}, {"finds", "found"},
    {"ignores", "ignored"}, {"protects", "protected"}, {"blames", "blamed"}, {"admires", "admired"}};

const std::vector<SentenceTemplate> kTemplates = {
    {"(S (NP (JJ $ADJ) (NN $SUBJ)) (VP (VBZ $VERB) (NP (NN $OBJ))) (. .))"},
    {"(S (NP (NN $OBJ)) (, ,) (S (NP (JJ $ADJ) (NN $SUBJ)) (VP (VBZ $VERB))) (. .))"},
    {"(S (NP (DT the) (JJ $ADJ) (NN $SUBJ)) (VP (VBZ $VERB) (NP (DT the) (NN $OBJ))) (. .))"},
    {"(NP (NP (DT a) (JJ $ADJ) (NN $SUBJ)) (SBAR (WHNP (WDT that)) (S (VP (VBZ $VERB) (NP (DT the) (NN $OBJ))))) "
     "(. .))"},
    {"(S (NP (DT the) (NN $OBJ)) (VP (VBZ is) (VP (VBN $VERBN) (PP (IN by) (NP (DT the) (JJ $ADJ) "
     "(NN $SUBJ))))) (. .))"},
    {"(S (NP (NN today)) (, ,) (NP (DT the) (JJ $ADJ) (NN $SUBJ)) (VP (VBZ $VERB) (NP (DT the) (NN $OBJ)) "
     "(ADVP (RB here))) (. .))"},
};

bool is_slot(const std::string& tok) { return !tok.empty() && tok[0] == '$'; }

std::string substitute(const std::string& tok, const ContentTuple& c) {
  if (tok == "$ADJ") return c.adjective;
  if (tok == "$SUBJ") return c.subject;
  if (tok == "$VERB") return c.verb;
  if (tok == "$VERBN") return c.participle;
  if (tok == "$OBJ") return c.object;
  throw ContractError("unknown template slot " + tok);
}

std::set<std::string> function_words() {
  std::set<std::string> out;
  for (const auto& t : kTemplates) {
    for (const auto& tok : t.pattern()) {
      if (!is_slot(tok)) out.insert(tok);
    }
  }
  return out;
}

int pattern_distance(const std::vector<std::string>& tokens, const std::vector<std::string>& pattern) {
  const std::size_t n = tokens.size(), m = pattern.size();
  std::vector<int> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      const bool same = is_slot(pattern[j - 1]) || tokens[i - 1] == pattern[j - 1];
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (same ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

}  // namespace

std::vector<std::string> SentenceTemplate::pattern() const {
  return metrics::parse_bracketed(bracketed).leaves();
}

std::string SentenceTemplate::fill(const ContentTuple& c) const {
  std::vector<std::string> out;
  for (const auto& tok : pattern()) out.push_back(is_slot(tok) ? substitute(tok, c) : tok);
  return join(out);
}

const std::vector<SentenceTemplate>& synthetic_templates() { return kTemplates; }

std::vector<ContentTuple> synthetic_contents(int count, std::mt19937_64& rng) {
  const auto fw = function_words();
  for (const auto* list : {&kAdjectives, &kNouns}) {
    for (const auto& w : *list) {
      if (fw.count(w)) throw DataError("content word '" + w + "' collides with a template function word");
    }
  }
  for (const auto& v : kVerbs) {
    if (fw.count(v.present) || fw.count(v.participle)) {
      throw DataError(std::string("verb '") + v.present + "' collides with a template function word");
    }
  }

  std::uniform_int_distribution<std::size_t> adj(0, kAdjectives.size() - 1);
  std::uniform_int_distribution<std::size_t> noun(0, kNouns.size() - 1);
  std::uniform_int_distribution<std::size_t> verb(0, kVerbs.size() - 1);
  std::set<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>> seen;
  std::vector<ContentTuple> out;
  while (static_cast<int>(out.size()) < count) {
    const std::size_t a = adj(rng), s = noun(rng), v = verb(rng), o = noun(rng);
    if (s == o || !seen.insert({a, s, v, o}).second) continue;
    out.push_back({kAdjectives[a], kNouns[s], kVerbs[v].present, kVerbs[v].participle, kNouns[o]});
  }
  return out;
}

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
  if (spec.contents < 1 || spec.contents > 1000) throw ConfigError("synthetic contents must be in [1, 1000]");
  if (spec.templates < 1 || spec.templates > static_cast<int>(kTemplates.size())) {
    throw ConfigError("synthetic templates must be in [1, " + std::to_string(kTemplates.size()) + "]");
  }
  if (spec.size == 0) throw ConfigError("synthetic corpus size must be positive");

  std::mt19937_64 rng(spec.seed);
  SyntheticCorpus corpus;
  corpus.contents = synthetic_contents(spec.contents, rng);
  std::uniform_int_distribution<int> pick_content(0, spec.contents - 1);
  std::uniform_int_distribution<int> pick_template(0, spec.templates - 1);
  corpus.examples.reserve(spec.size);
  for (std::size_t i = 0; i < spec.size; ++i) {
    const int c = pick_content(rng);
    const int t = pick_template(rng);
    const auto& tpl = kTemplates[t];
    std::string bracketed = tpl.bracketed;
    for (const char* slot : {"$VERBN", "$ADJ", "$SUBJ", "$VERB", "$OBJ"}) {
      const std::string s(slot);
      for (std::size_t pos; (pos = bracketed.find(s + ")")) != std::string::npos;) {
        bracketed.replace(pos, s.size(), substitute(s, corpus.contents[c]));
      }
    }
    SentenceExample ex = SentenceExample::make(tpl.fill(corpus.contents[c]), bracketed);
    ex.content_id = c;
    ex.template_id = t;
    corpus.examples.push_back(std::move(ex));
  }
  return corpus;
}

std::optional<int> match_template(const std::vector<std::string>& tokens, int max_distance) {
  int best = -1, best_d = max_distance + 1;
  for (std::size_t t = 0; t < kTemplates.size(); ++t) {
    const int d = pattern_distance(tokens, kTemplates[t].pattern());
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(t);
    }
  }
  if (best < 0) return std::nullopt;
  return best;
}

void write_synthetic(const std::string& path, const std::vector<SentenceExample>& examples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write corpus '" + path + "'");
  out << "# synthetic\n";
  for (const auto& ex : examples) {
    if (!ex.parse || !ex.content_id || !ex.template_id) throw DataError("synthetic example lacks a parse or factor ids");
    out << join(ex.tokens) << '\t' << metrics::serialize(*ex.parse) << '\t' << *ex.content_id << '\t'
        << *ex.template_id << '\n';
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::vector<SentenceExample> read_synthetic(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read corpus '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != "# synthetic") {
    throw DataError("'" + path + "' is not a synthetic corpus (missing header)");
  }
  std::vector<SentenceExample> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, '\t')) f.push_back(field);
    const std::string where = path + ":" + std::to_string(lineno);
    if (f.size() != 4) throw DataError(where + ": expected 4 tab-separated fields");
    try {
      SentenceExample ex = SentenceExample::make(f[0], f[1]);
      ex.content_id = std::stoi(f[2]);
      ex.template_id = std::stoi(f[3]);
      out.push_back(std::move(ex));
    } catch (const std::logic_error&) {
      throw DataError(where + ": bad factor id");
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
  }
  if (out.empty()) throw DataError("corpus '" + path + "' has no sentences");
  return out;
}

}  // namespace pvae::data
