#include <algorithm>
#include <random>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "nesy/logic/forward_chain.hpp"
#include "nesy/logic/problem.hpp"

namespace nesy::logic {

namespace {

// mt19937_64 output is fixed by the standard; the std distributions are not,
// so bounded draws are done here to keep files identical across toolchains.
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}

  std::size_t below(std::size_t n) {
    if (n <= 1) return 0;
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
      x = rng_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
  }

  bool coin() { return below(2) == 1; }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

  template <class T>
  T take(std::vector<T>& pool) {
    std::size_t i = below(pool.size());
    T out = pool[i];
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(i));
    return out;
  }

 private:
  std::mt19937_64 rng_;
};

enum class DistractorKind { contrary_rule, branch_rule, side_fact };

DistractorKind distractor_kind(std::size_t i) {
  // The first distractor always contradicts the answer from an unreachable
  // category; the rest cycle through side facts and branch rules.
  if (i == 0) return DistractorKind::contrary_rule;
  switch (i % 3) {
    case 1: return DistractorKind::side_fact;
    case 2: return DistractorKind::branch_rule;
    default: return DistractorKind::contrary_rule;
  }
}

}  // namespace

std::vector<Problem> generate_problems(const GeneratorOptions& options) {
  if (options.hops < 1 || options.hops > 3) throw std::invalid_argument("hops must be in 1..3");
  if (options.count == 0) throw std::invalid_argument("count must be positive");
  const Lexicon& lex = options.lexicon ? *options.lexicon : Lexicon::standard();
  const std::size_t hops = static_cast<std::size_t>(options.hops);

  std::size_t nouns_needed = hops;
  std::size_t any_needed = 1;
  for (std::size_t i = 0; i < options.distractors; ++i) {
    if (distractor_kind(i) == DistractorKind::branch_rule) {
      ++any_needed;
    } else {
      ++nouns_needed;
    }
  }
  const auto all_nouns = lex.nouns();
  if (nouns_needed > all_nouns.size() || nouns_needed + any_needed > lex.entries().size()) {
    throw LexiconExhausted(fmt::format("lexicon has {} nouns / {} words; {} hops with {} distractors need {} / {}",
                                       all_nouns.size(), lex.entries().size(), hops, options.distractors,
                                       nouns_needed, nouns_needed + any_needed));
  }
  if (lex.names().empty()) throw LexiconExhausted("lexicon has no proper names");

  Draw draw(options.seed);

  std::vector<bool> answers(options.count);
  for (std::size_t i = 0; i < options.count; ++i) answers[i] = i < (options.count + draw.below(2)) / 2;
  draw.shuffle(answers);

  std::vector<Problem> out;
  out.reserve(options.count);
  for (std::size_t index = 0; index < options.count; ++index) {
    const bool answer = answers[index];
    std::vector<std::string> nouns = all_nouns;
    std::vector<std::string> words;
    for (const auto& e : lex.entries()) words.push_back(e.singular);

    std::set<std::string> used;
    auto take_noun = [&] {
      std::string w;
      do {
        w = draw.take(nouns);
      } while (used.contains(w));
      used.insert(w);
      return predicate_from_words(w);
    };
    auto take_any = [&] {
      std::string w;
      do {
        w = draw.take(words);
      } while (used.contains(w));
      used.insert(w);
      return predicate_from_words(w);
    };

    const Symbol name = constant_symbol(lex.names()[draw.below(lex.names().size())]);

    std::vector<Symbol> path;
    for (std::size_t i = 0; i < hops; ++i) path.push_back(take_noun());
    const Symbol target = take_any();

    std::vector<Rule> rules;
    std::vector<Step> chain{FactStep{Literal::fact(path[0], name)}};
    for (std::size_t i = 0; i + 1 < hops; ++i) {
      rules.push_back(Rule::make(path[i], path[i + 1]));
      chain.push_back(RuleStep{rules.back()});
    }
    rules.push_back(Rule::make(path.back(), target, !answer));
    chain.push_back(RuleStep{rules.back()});

    std::vector<Literal> facts{Literal::fact(path[0], name)};
    std::vector<Symbol> nouns_in_play = path;
    for (std::size_t i = 0; i < options.distractors; ++i) {
      switch (distractor_kind(i)) {
        case DistractorKind::contrary_rule: {
          Symbol unreachable = take_noun();
          rules.push_back(Rule::make(unreachable, target, answer));
          nouns_in_play.push_back(unreachable);
          break;
        }
        case DistractorKind::branch_rule: {
          Symbol from = nouns_in_play[draw.below(nouns_in_play.size())];
          Symbol to = take_any();
          rules.push_back(Rule::make(from, to, draw.coin()));
          if (!lex.is_adjective(predicate_words(to))) nouns_in_play.push_back(to);
          break;
        }
        case DistractorKind::side_fact: {
          Symbol side = take_noun();
          facts.push_back(Literal::fact(side, name));
          nouns_in_play.push_back(side);
          break;
        }
      }
    }

    draw.shuffle(rules);
    draw.shuffle(facts);

    std::string question;
    for (const auto& r : rules) {
      if (!question.empty()) question += ' ';
      question += describe_rule(r, static_cast<RulePhrasing>(draw.below(3)), lex);
    }
    for (const auto& f : facts) {
      if (!question.empty()) question += ' ';
      question += describe_fact(f, lex);
    }

    const Literal query = Literal::fact(target, name);
    KnowledgeBase kb(facts, rules, query);
    GoldenChain golden(std::move(chain));

    const Literal conclusion = answer ? query : query.complement();
    if (decide_query(kb) != (answer ? Verdict::True : Verdict::False) || replay(golden) != conclusion) {
      throw std::logic_error("generated problem violates its own answer: " + to_string(query));
    }

    Problem p;
    p.id = fmt::format("{}h{}-{:04}", options.id_prefix, hops, index);
    p.question = std::move(question);
    p.query = describe_query(query, lex);
    p.answer = answer;
    p.kb = std::move(kb);
    p.chain = std::move(golden);
    p.hops = options.hops;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace nesy::logic
