#include "boa/infer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

#include "boa/errors.hpp"
#include "boa/parallel.hpp"

namespace boa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct PredCounts {
  std::size_t tp = 0;
  std::size_t covered = 0;
};

// Counts of (a | b) over the labels and overall.
PredCounts counts_or(const Bitset& a, const Bitset& b, const Bitset& y) {
  const auto wa = a.words();
  const auto wb = b.words();
  const auto wy = y.words();
  PredCounts c;
  for (std::size_t i = 0; i < wa.size(); ++i) {
    const auto x = wa[i] | wb[i];
    c.tp += static_cast<std::size_t>(std::popcount(x & wy[i]));
    c.covered += static_cast<std::size_t>(std::popcount(x));
  }
  return c;
}

// Counts of (a | (b & c)).
PredCounts counts_or_and(const Bitset& a, const Bitset& b, const Bitset& c, const Bitset& y) {
  const auto wa = a.words();
  const auto wb = b.words();
  const auto wc = c.words();
  const auto wy = y.words();
  PredCounts r;
  for (std::size_t i = 0; i < wa.size(); ++i) {
    const auto x = wa[i] | (wb[i] & wc[i]);
    r.tp += static_cast<std::size_t>(std::popcount(x & wy[i]));
    r.covered += static_cast<std::size_t>(std::popcount(x));
  }
  return r;
}

// OR of every member except i, for each i.
std::vector<Bitset> leave_one_out(const std::vector<const Bitset*>& covs, std::size_t nbits) {
  const std::size_t m = covs.size();
  std::vector<Bitset> out(m, Bitset(nbits));
  Bitset acc(nbits);
  for (std::size_t i = 0; i < m; ++i) {
    out[i] = acc;
    acc |= *covs[i];
  }
  acc.reset();
  for (std::size_t i = m; i-- > 0;) {
    out[i] |= acc;
    acc |= *covs[i];
  }
  return out;
}

// Uniform choice among tied minimum energies, by reservoir sampling.
class ArgMin {
 public:
  void offer(double e, std::size_t a, std::size_t b, Rng& rng) {
    if (e < best_) {
      best_ = e;
      a_ = a;
      b_ = b;
      ties_ = 1;
    } else if (e == best_ && e < kInf) {
      ++ties_;
      if (rng.below(ties_) == 0) {
        a_ = a;
        b_ = b;
      }
    }
  }
  bool found() const { return ties_ > 0; }
  double energy() const { return best_; }
  std::size_t a() const { return a_; }
  std::size_t b() const { return b_; }

 private:
  double best_ = kInf;
  std::size_t a_ = 0;
  std::size_t b_ = 0;
  std::size_t ties_ = 0;
};

// A change of at most one removed and one added pattern. Length 0 means
// "none".
struct PriorChange {
  std::size_t removed_len = 0;
  double removed_term = 0.0;
  std::size_t added_len = 0;
  double added_term = 0.0;
};

// Log prior of the current member multiset plus cheap what-if queries.
class PriorTracker {
 public:
  explicit PriorTracker(const ModelParams& params) : params_(&params) {}

  void set(const std::vector<std::size_t>& lengths, const std::vector<double>& terms) {
    m_ = lengths.size();
    switch (params_->prior) {
      case PriorKind::kFlat: value_ = 0.0; break;
      case PriorKind::kPoisson: {
        terms_ = 0.0;
        for (double t : terms) terms_ += t;
        const double lm = params_->poisson.lambda_m;
        value_ = log_poisson_pmf(m_, lm) + terms_;
        pois_up_ = log_poisson_pmf(m_ + 1, lm);
        pois_same_ = log_poisson_pmf(m_, lm);
        pois_down_ = m_ > 0 ? log_poisson_pmf(m_ - 1, lm) : -kInf;
        break;
      }
      case PriorKind::kBetaBinomial: {
        const auto& h = params_->betabinomial;
        counts_.assign(h.max_length(), 0);
        for (std::size_t l : lengths) {
          if (l == 0 || l > h.max_length()) throw ModelError("betabinomial: pattern longer than the pool range");
          ++counts_[l - 1];
        }
        value_ = log_prior_betabinomial_counts(counts_, h);
        inc_.assign(h.max_length(), -kInf);
        dec_.assign(h.max_length(), -kInf);
        for (std::size_t l = 0; l < h.max_length(); ++l) {
          const double cur = term(l, counts_[l]);
          if (counts_[l] < h.pool_sizes[l]) inc_[l] = term(l, counts_[l] + 1) - cur;
          if (counts_[l] > 0) dec_[l] = term(l, counts_[l] - 1) - cur;
        }
        break;
      }
    }
  }

  double value() const { return value_; }

  double after(const PriorChange& c) const {
    switch (params_->prior) {
      case PriorKind::kFlat: return 0.0;
      case PriorKind::kPoisson: {
        const bool rem = c.removed_len != 0;
        const bool add = c.added_len != 0;
        const double pm = rem == add ? pois_same_ : (add ? pois_up_ : pois_down_);
        return pm + (terms_ - c.removed_term + c.added_term);
      }
      case PriorKind::kBetaBinomial: {
        if (c.added_len > counts_.size()) return -kInf;
        if (c.removed_len != 0 && c.removed_len == c.added_len) return value_;
        double v = value_;
        if (c.removed_len != 0) v += dec_[c.removed_len - 1];
        if (c.added_len != 0) v += inc_[c.added_len - 1];
        return v;
      }
    }
    return 0.0;
  }

 private:
  double term(std::size_t l, std::size_t m) const {
    const auto& h = params_->betabinomial;
    return log_beta(static_cast<double>(m) + h.alpha[l], static_cast<double>(h.pool_sizes[l] - m) + h.beta[l]) -
           log_beta(h.alpha[l], h.beta[l]);
  }

  const ModelParams* params_;
  std::size_t m_ = 0;
  double value_ = 0.0;
  double terms_ = 0.0;
  double pois_up_ = 0.0, pois_same_ = 0.0, pois_down_ = 0.0;
  std::vector<std::size_t> counts_;
  std::vector<double> inc_, dec_;
};

double pattern_term(std::span<const Literal> lits, const ModelParams& params) {
  return params.prior == PriorKind::kPoisson ? poisson_pattern_term(lits, params.poisson) : 0.0;
}

// Shared by both chains: turns counts into energies.
struct Scorer {
  const DatasetIndex* index;
  const ModelParams* params;
  LikelihoodTable table;

  Scorer(const DatasetIndex& idx, const ModelParams& p)
      : index(&idx), params(&p), table(p.likelihood, idx.num_records()) {}

  double energy(double log_prior, std::size_t tp, std::size_t covered) const {
    if (log_prior == -kInf) return kInf;
    const std::size_t fp = covered - tp;
    return -(log_prior + table(tp, fp, index->num_negative() - fp, index->num_positive() - tp));
  }
};

// ---------------------------------------------------------------------------
// Pattern-level chain: the state is a list of pool ids.

class PatternChain {
 public:
  using State = std::vector<std::size_t>;

  struct Move {
    enum Kind { kNone, kAdd, kRemove } kind = kNone;
    std::size_t id = 0;  // pool id for kAdd, member slot for kRemove
    double energy = kInf;
  };

  PatternChain(const Scorer& scorer, const MinedPool& pool)
      : scorer_(&scorer), pool_(&pool), prior_(*scorer.params), in_set_(pool.size(), 0) {
    terms_.reserve(pool.size());
    for (const auto& mp : pool.patterns) terms_.push_back(pattern_term(mp.pattern.literals(), *scorer.params));
  }

  void reset(State members) {
    for (std::size_t id : state_) in_set_[id] = 0;
    state_ = std::move(members);
    const auto& index = *scorer_->index;
    pred_ = Bitset(index.num_records());
    std::vector<std::size_t> lengths;
    std::vector<double> terms;
    for (std::size_t id : state_) {
      in_set_[id] = 1;
      pred_ |= cov(id);
      lengths.push_back(len(id));
      terms.push_back(terms_[id]);
    }
    prior_.set(lengths, terms);
    tp_ = count_and(pred_, index.labels());
    covered_ = pred_.count();
    energy_ = scorer_->energy(prior_.value(), tp_, covered_);
  }

  double energy() const { return energy_; }
  const Bitset& prediction() const { return pred_; }
  const State& state() const { return state_; }

  Move propose(Action action, double p, Rng& rng) {
    return action == Action::kCoverMore ? propose_add(p, rng) : propose_remove(p, rng);
  }

  State after(const Move& mv) const {
    State s = state_;
    if (mv.kind == Move::kAdd) s.push_back(mv.id);
    if (mv.kind == Move::kRemove) s.erase(s.begin() + static_cast<std::ptrdiff_t>(mv.id));
    return s;
  }

  void apply(const Move& mv) {
    if (mv.kind != Move::kNone) reset(after(mv));
  }

  PatternSet materialize(const State& s) const {
    std::vector<Pattern> ps;
    ps.reserve(s.size());
    for (std::size_t id : s) ps.push_back(pool_->patterns[id].pattern);
    return PatternSet(std::move(ps));
  }

 private:
  const Bitset& cov(std::size_t id) const { return pool_->patterns[id].pattern.coverage(); }
  std::size_t len(std::size_t id) const { return pool_->patterns[id].pattern.length(); }

  double add_energy(std::size_t id, const Bitset& uncovered_pos, const Bitset& uncovered_neg) const {
    const std::size_t gain_tp = count_and(cov(id), uncovered_pos);
    const std::size_t gain_fp = count_and(cov(id), uncovered_neg);
    const double prior = prior_.after({0, 0.0, len(id), terms_[id]});
    return scorer_->energy(prior, tp_ + gain_tp, covered_ + gain_tp + gain_fp);
  }

  Move propose_add(double p, Rng& rng) {
    Move mv;
    const std::size_t n = pool_->size();
    const std::size_t free = n - state_.size();
    const bool explore = rng.bernoulli(p);
    if (free == 0) return mv;
    const auto& index = *scorer_->index;
    Bitset upos = index.labels();
    upos.and_not(pred_);
    Bitset uneg = index.negatives();
    uneg.and_not(pred_);
    mv.kind = Move::kAdd;
    if (explore) {
      std::size_t k = rng.below(free);
      for (std::size_t id = 0; id < n; ++id) {
        if (in_set_[id]) continue;
        if (k-- == 0) {
          mv.id = id;
          break;
        }
      }
      mv.energy = add_energy(mv.id, upos, uneg);
      return mv;
    }
    ArgMin best;
    for (std::size_t id = 0; id < n; ++id) {
      if (!in_set_[id]) best.offer(add_energy(id, upos, uneg), id, 0, rng);
    }
    if (!best.found()) return Move{};
    mv.id = best.a();
    mv.energy = best.energy();
    return mv;
  }

  double remove_energy(std::size_t slot, const Bitset& others) const {
    const std::size_t id = state_[slot];
    const double prior = prior_.after({len(id), terms_[id], 0, 0.0});
    const auto& y = scorer_->index->labels();
    return scorer_->energy(prior, count_and(others, y), others.count());
  }

  Move propose_remove(double p, Rng& rng) {
    Move mv;
    const bool explore = rng.bernoulli(p);
    if (state_.empty()) return mv;
    std::vector<const Bitset*> covs;
    for (std::size_t id : state_) covs.push_back(&cov(id));
    const auto others = leave_one_out(covs, pred_.size());
    mv.kind = Move::kRemove;
    if (explore) {
      mv.id = rng.below(state_.size());
      mv.energy = remove_energy(mv.id, others[mv.id]);
      return mv;
    }
    ArgMin best;
    for (std::size_t s = 0; s < state_.size(); ++s) best.offer(remove_energy(s, others[s]), s, 0, rng);
    if (!best.found()) return Move{};
    mv.id = best.a();
    mv.energy = best.energy();
    return mv;
  }

  const Scorer* scorer_;
  const MinedPool* pool_;
  PriorTracker prior_;
  std::vector<double> terms_;
  std::vector<char> in_set_;
  State state_;
  Bitset pred_;
  std::size_t tp_ = 0;
  std::size_t covered_ = 0;
  double energy_ = 0.0;
};

// ---------------------------------------------------------------------------
// Literal-level chain: the state is a list of literal-id lists (each sorted).

class LiteralChain {
 public:
  using Ids = std::vector<std::uint32_t>;
  using State = std::vector<Ids>;

  struct Move {
    enum Kind { kNone, kRemoveLiteral, kAddSingleton, kAddLiteral, kRemovePattern } kind = kNone;
    std::size_t slot = 0;
    std::size_t arg = 0;  // literal position (kRemoveLiteral) or literal id
    double energy = kInf;
  };

  LiteralChain(const Scorer& scorer, std::size_t max_length) : scorer_(&scorer), prior_(*scorer.params) {
    const auto& index = *scorer.index;
    const auto universe = index.universe();
    nlit_ = universe.size();
    max_length_ = max_length;
    if (scorer.params->prior == PriorKind::kBetaBinomial) {
      max_length_ = std::min(max_length_, scorer.params->betabinomial.max_length());
    }
    conflict_.assign(nlit_ * nlit_, 0);
    for (std::size_t a = 0; a < nlit_; ++a) {
      for (std::size_t b = 0; b < nlit_; ++b) conflict_[a * nlit_ + b] = (a == b || literals_conflict(universe[a], universe[b])) ? 1 : 0;
    }
  }

  void reset(State members) {
    state_ = std::move(members);
    const auto& index = *scorer_->index;
    covs_.clear();
    terms_.clear();
    pred_ = Bitset(index.num_records());
    std::vector<std::size_t> lengths;
    for (const auto& ids : state_) {
      covs_.push_back(coverage_of(ids));
      terms_.push_back(term_of(ids));
      lengths.push_back(ids.size());
      pred_ |= covs_.back();
    }
    prior_.set(lengths, terms_);
    tp_ = count_and(pred_, index.labels());
    covered_ = pred_.count();
    energy_ = scorer_->energy(prior_.value(), tp_, covered_);
  }

  double energy() const { return energy_; }
  const Bitset& prediction() const { return pred_; }
  const State& state() const { return state_; }

  Move propose(Action action, double p, Rng& rng) {
    others_valid_ = false;
    const bool first = rng.bernoulli(0.5);
    if (action == Action::kCoverMore) {
      const bool can_remove_lit = !state_.empty();
      const bool can_add_single = has_free_singleton();
      const bool pick_remove = can_remove_lit && (first || !can_add_single);
      if (pick_remove) return remove_literal(p, rng);
      if (can_add_single) return add_singleton(p, rng);
      return Move{};
    }
    const bool can_add_lit = has_augmentable();
    const bool can_remove_pat = !state_.empty();
    const bool pick_add = can_add_lit && (first || !can_remove_pat);
    if (pick_add) return add_literal(p, rng);
    if (can_remove_pat) return remove_pattern(p, rng);
    return Move{};
  }

  State after(const Move& mv) const {
    State s = state_;
    switch (mv.kind) {
      case Move::kNone: break;
      case Move::kRemoveLiteral: {
        Ids ids = s[mv.slot];
        ids.erase(ids.begin() + static_cast<std::ptrdiff_t>(mv.arg));
        s.erase(s.begin() + static_cast<std::ptrdiff_t>(mv.slot));
        if (!ids.empty() && std::find(s.begin(), s.end(), ids) == s.end()) s.push_back(std::move(ids));
        break;
      }
      case Move::kAddSingleton: s.push_back(Ids{static_cast<std::uint32_t>(mv.arg)}); break;
      case Move::kAddLiteral: {
        Ids ids = s[mv.slot];
        ids.insert(std::upper_bound(ids.begin(), ids.end(), mv.arg), static_cast<std::uint32_t>(mv.arg));
        s.erase(s.begin() + static_cast<std::ptrdiff_t>(mv.slot));
        if (std::find(s.begin(), s.end(), ids) == s.end()) s.push_back(std::move(ids));
        break;
      }
      case Move::kRemovePattern: s.erase(s.begin() + static_cast<std::ptrdiff_t>(mv.slot)); break;
    }
    return s;
  }

  void apply(const Move& mv) {
    if (mv.kind != Move::kNone) reset(after(mv));
  }

  PatternSet materialize(const State& s) const {
    std::vector<Pattern> ps;
    ps.reserve(s.size());
    for (const auto& ids : s) {
      std::vector<std::size_t> wide(ids.begin(), ids.end());
      ps.push_back(Pattern::from_ids(wide, *scorer_->index));
    }
    return PatternSet(std::move(ps));
  }

 private:
  Bitset coverage_of(const Ids& ids) const {
    const auto& index = *scorer_->index;
    Bitset c(index.num_records(), true);
    for (auto id : ids) c &= index.coverage(id);
    return c;
  }

  double term_of(const Ids& ids) const {
    if (scorer_->params->prior != PriorKind::kPoisson) return 0.0;
    std::vector<Literal> lits;
    lits.reserve(ids.size());
    for (auto id : ids) lits.push_back(scorer_->index->universe()[id]);
    return poisson_pattern_term(lits, scorer_->params->poisson);
  }

  bool duplicate_of_other(const Ids& ids, std::size_t skip) const {
    for (std::size_t j = 0; j < state_.size(); ++j) {
      if (j != skip && state_[j] == ids) return true;
    }
    return false;
  }

  bool is_singleton_member(std::size_t lit) const {
    for (const auto& ids : state_) {
      if (ids.size() == 1 && ids[0] == lit) return true;
    }
    return false;
  }

  bool has_free_singleton() const {
    std::size_t singles = 0;
    for (const auto& ids : state_) singles += ids.size() == 1 ? 1 : 0;
    return singles < nlit_;
  }

  bool can_augment(const Ids& ids, std::size_t lit) const {
    if (ids.size() >= max_length_) return false;
    for (auto id : ids) {
      if (conflict_[id * nlit_ + lit]) return false;
    }
    return true;
  }

  bool has_augmentable() const {
    for (const auto& ids : state_) {
      for (std::size_t lit = 0; lit < nlit_; ++lit) {
        if (can_augment(ids, lit)) return true;
      }
    }
    return false;
  }

  const std::vector<Bitset>& others() {
    if (!others_valid_) {
      std::vector<const Bitset*> covs;
      for (const auto& c : covs_) covs.push_back(&c);
      others_ = leave_one_out(covs, pred_.size());
      others_valid_ = true;
    }
    return others_;
  }

  // Energy of replacing member `slot` with `ids` (empty ids: drop it).
  double replace_energy(std::size_t slot, const Ids& ids, const Bitset& new_cov) {
    const auto& y = scorer_->index->labels();
    PriorChange ch{state_[slot].size(), terms_[slot], 0, 0.0};
    if (!ids.empty() && !duplicate_of_other(ids, slot)) {
      ch.added_len = ids.size();
      ch.added_term = term_of(ids);
    }
    const auto c = ids.empty() ? PredCounts{count_and(others()[slot], y), others()[slot].count()}
                               : counts_or(others()[slot], new_cov, y);
    return scorer_->energy(prior_.after(ch), c.tp, c.covered);
  }

  double remove_literal_energy(std::size_t slot, std::size_t pos) {
    Ids ids = state_[slot];
    ids.erase(ids.begin() + static_cast<std::ptrdiff_t>(pos));
    const Bitset cov = ids.empty() ? Bitset(pred_.size()) : coverage_of(ids);
    return replace_energy(slot, ids, cov);
  }

  Move remove_literal(double p, Rng& rng) {
    Move mv;
    mv.kind = Move::kRemoveLiteral;
    if (rng.bernoulli(p)) {
      mv.slot = rng.below(state_.size());
      mv.arg = rng.below(state_[mv.slot].size());
      mv.energy = remove_literal_energy(mv.slot, mv.arg);
      return mv;
    }
    ArgMin best;
    for (std::size_t s = 0; s < state_.size(); ++s) {
      for (std::size_t pos = 0; pos < state_[s].size(); ++pos) best.offer(remove_literal_energy(s, pos), s, pos, rng);
    }
    if (!best.found()) return Move{};
    mv.slot = best.a();
    mv.arg = best.b();
    mv.energy = best.energy();
    return mv;
  }

  double singleton_energy(std::size_t lit, const Bitset& upos, const Bitset& uneg) const {
    const auto& cov = scorer_->index->coverage(lit);
    const std::size_t gain_tp = count_and(cov, upos);
    const std::size_t gain_fp = count_and(cov, uneg);
    const Ids ids{static_cast<std::uint32_t>(lit)};
    const double prior = prior_.after({0, 0.0, 1, term_of(ids)});
    return scorer_->energy(prior, tp_ + gain_tp, covered_ + gain_tp + gain_fp);
  }

  Move add_singleton(double p, Rng& rng) {
    Move mv;
    mv.kind = Move::kAddSingleton;
    const auto& index = *scorer_->index;
    Bitset upos = index.labels();
    upos.and_not(pred_);
    Bitset uneg = index.negatives();
    uneg.and_not(pred_);
    std::vector<std::size_t> free;
    for (std::size_t lit = 0; lit < nlit_; ++lit) {
      if (!is_singleton_member(lit)) free.push_back(lit);
    }
    if (rng.bernoulli(p)) {
      mv.arg = free[rng.below(free.size())];
      mv.energy = singleton_energy(mv.arg, upos, uneg);
      return mv;
    }
    ArgMin best;
    for (std::size_t lit : free) best.offer(singleton_energy(lit, upos, uneg), lit, 0, rng);
    if (!best.found()) return Move{};
    mv.arg = best.a();
    mv.energy = best.energy();
    return mv;
  }

  double add_literal_energy(std::size_t slot, std::size_t lit) {
    Ids ids = state_[slot];
    ids.insert(std::upper_bound(ids.begin(), ids.end(), lit), static_cast<std::uint32_t>(lit));
    const auto& y = scorer_->index->labels();
    PriorChange ch{state_[slot].size(), terms_[slot], 0, 0.0};
    if (!duplicate_of_other(ids, slot)) {
      ch.added_len = ids.size();
      ch.added_term = term_of(ids);
    }
    const auto c = counts_or_and(others()[slot], covs_[slot], scorer_->index->coverage(lit), y);
    return scorer_->energy(prior_.after(ch), c.tp, c.covered);
  }

  Move add_literal(double p, Rng& rng) {
    Move mv;
    mv.kind = Move::kAddLiteral;
    if (rng.bernoulli(p)) {
      std::vector<std::size_t> slots;
      for (std::size_t s = 0; s < state_.size(); ++s) {
        for (std::size_t lit = 0; lit < nlit_; ++lit) {
          if (can_augment(state_[s], lit)) {
            slots.push_back(s);
            break;
          }
        }
      }
      mv.slot = slots[rng.below(slots.size())];
      std::vector<std::size_t> lits;
      for (std::size_t lit = 0; lit < nlit_; ++lit) {
        if (can_augment(state_[mv.slot], lit)) lits.push_back(lit);
      }
      mv.arg = lits[rng.below(lits.size())];
      mv.energy = add_literal_energy(mv.slot, mv.arg);
      return mv;
    }
    ArgMin best;
    for (std::size_t s = 0; s < state_.size(); ++s) {
      for (std::size_t lit = 0; lit < nlit_; ++lit) {
        if (can_augment(state_[s], lit)) best.offer(add_literal_energy(s, lit), s, lit, rng);
      }
    }
    if (!best.found()) return Move{};
    mv.slot = best.a();
    mv.arg = best.b();
    mv.energy = best.energy();
    return mv;
  }

  Move remove_pattern(double p, Rng& rng) {
    Move mv;
    mv.kind = Move::kRemovePattern;
    const Bitset none;
    if (rng.bernoulli(p)) {
      mv.slot = rng.below(state_.size());
      mv.energy = replace_energy(mv.slot, Ids{}, none);
      return mv;
    }
    ArgMin best;
    for (std::size_t s = 0; s < state_.size(); ++s) best.offer(replace_energy(s, Ids{}, none), s, 0, rng);
    if (!best.found()) return Move{};
    mv.slot = best.a();
    mv.energy = best.energy();
    return mv;
  }

  const Scorer* scorer_;
  PriorTracker prior_;
  std::size_t nlit_ = 0;
  std::size_t max_length_ = 0;
  std::vector<char> conflict_;
  State state_;
  std::vector<Bitset> covs_;
  std::vector<double> terms_;
  std::vector<Bitset> others_;
  bool others_valid_ = false;
  Bitset pred_;
  std::size_t tp_ = 0;
  std::size_t covered_ = 0;
  double energy_ = 0.0;
};

// ---------------------------------------------------------------------------

std::vector<std::size_t> init_pattern_ids(std::size_t pool_size, double lambda_m, Rng& rng) {
  const std::size_t m = std::min<std::size_t>(rng.poisson(lambda_m), pool_size);
  std::vector<std::size_t> ids(pool_size);
  for (std::size_t i = 0; i < pool_size; ++i) ids[i] = i;
  for (std::size_t i = 0; i < m; ++i) std::swap(ids[i], ids[i + rng.below(pool_size - i)]);
  ids.resize(m);
  return ids;
}

LiteralChain::State init_literal_state(std::size_t nlit, double lambda_m, Rng& rng) {
  LiteralChain::State s;
  for (std::size_t id : init_pattern_ids(nlit, lambda_m, rng)) s.push_back({static_cast<std::uint32_t>(id)});
  return s;
}

template <class Chain>
struct ChainOutcome {
  typename Chain::State best;
  double best_energy = kInf;
  std::vector<TraceRow> trace;
  std::vector<std::pair<typename Chain::State, double>> checkpoints;
  std::vector<double> checkpoint_seconds;
  std::size_t steps = 0;
};

template <class Chain>
ChainOutcome<Chain> run_chain(Chain& chain, typename Chain::State init, const DatasetIndex& index, const SAConfig& sa,
                              Rng& rng, std::uint32_t chain_id) {
  ChainOutcome<Chain> out;
  const auto started = std::chrono::steady_clock::now();
  chain.reset({});
  out.best = {};
  out.best_energy = chain.energy();
  chain.reset(std::move(init));
  if (chain.energy() < out.best_energy) {
    out.best = chain.state();
    out.best_energy = chain.energy();
  }
  std::size_t next_cp = 0;
  const auto record_checkpoints = [&](std::size_t step) {
    while (next_cp < sa.checkpoints.size() && sa.checkpoints[next_cp] <= step) {
      out.checkpoints.emplace_back(out.best, out.best_energy);
      out.checkpoint_seconds.push_back(
          std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
      ++next_cp;
    }
  };
  record_checkpoints(0);
  std::size_t step = 0;
  while (step < sa.max_steps) {
    Bitset wrong = chain.prediction() ^ index.labels();
    const std::size_t n_wrong = wrong.count();
    if (n_wrong == 0) break;
    ++step;
    const std::size_t ex = wrong.nth_set(rng.below(n_wrong));
    const Action action = index.labels().test(ex) ? Action::kCoverMore : Action::kCoverLess;
    const auto mv = chain.propose(action, sa.explore_p, rng);
    bool accepted = false;
    if (mv.kind != Chain::Move::kNone) {
      if (mv.energy < out.best_energy) {
        out.best = chain.after(mv);
        out.best_energy = mv.energy;
      }
      const double delta = mv.energy - chain.energy();
      const double temperature = sa.t0 / std::log1p(static_cast<double>(step));
      accepted = delta <= 0.0 || rng.uniform() < std::exp(-delta / temperature);
      if (accepted) chain.apply(mv);
    }
    if (sa.record_trace) out.trace.push_back(TraceRow{chain_id, step, chain.energy(), out.best_energy, accepted});
    record_checkpoints(step);
  }
  out.steps = step;
  // A chain that halted early keeps its final best for later checkpoints.
  record_checkpoints(std::numeric_limits<std::size_t>::max());
  return out;
}

template <class Chain, class MakeChain, class Init>
SearchResult run_search(const DatasetIndex& index, const ModelParams& params, const SAConfig& sa, const MinedPool* pool,
                        MakeChain&& make_chain, Init&& init) {
  const Scorer scorer(index, params);
  std::vector<ChainOutcome<Chain>> outcomes(sa.restarts);
  std::vector<PatternSet> bests(sa.restarts);
  std::vector<Score> scores(sa.restarts);
  const std::size_t threads = sa.threads == 0 ? default_thread_count() : sa.threads;
  parallel_for(sa.restarts, threads, [&](std::size_t c) {
    Rng rng(derive_seed(sa.seed, {stream::kChain, c}));
    Chain chain = make_chain(scorer);
    auto start = init(rng);
    outcomes[c] = run_chain(chain, std::move(start), index, sa, rng, static_cast<std::uint32_t>(c));
    bests[c] = chain.materialize(outcomes[c].best);
    scores[c] = score(bests[c], index, params, pool);
  });

  SearchResult result;
  std::size_t winner = 0;
  for (std::size_t c = 1; c < sa.restarts; ++c) {
    if (scores[c].log_joint > scores[winner].log_joint) winner = c;
  }
  result.best = bests[winner];
  result.score = scores[winner];
  for (std::size_t c = 0; c < sa.restarts; ++c) {
    result.chain_energies.push_back(scores[c].energy());
    result.chain_steps.push_back(outcomes[c].steps);
    result.trace.insert(result.trace.end(), outcomes[c].trace.begin(), outcomes[c].trace.end());
  }
  if (!sa.checkpoints.empty()) {
    Chain chain = make_chain(scorer);
    for (std::size_t k = 0; k < sa.checkpoints.size(); ++k) {
      std::size_t pick = 0;
      CheckpointRecord rec;
      for (std::size_t c = 0; c < sa.restarts; ++c) {
        if (outcomes[c].checkpoints[k].second < outcomes[pick].checkpoints[k].second) pick = c;
        rec.seconds = std::max(rec.seconds, outcomes[c].checkpoint_seconds[k]);
      }
      rec.step = sa.checkpoints[k];
      rec.best = chain.materialize(outcomes[pick].checkpoints[k].first);
      rec.energy = score(rec.best, index, params, pool).energy();
      result.checkpoints.push_back(std::move(rec));
    }
  }
  return result;
}

std::vector<std::size_t> pool_ids_of(const PatternSet& set, const MinedPool& pool) {
  std::vector<std::size_t> ids;
  for (const auto& p : set.patterns()) {
    const auto it = std::lower_bound(pool.patterns.begin(), pool.patterns.end(), p,
                                     [](const MinedPattern& mp, const Pattern& q) { return mp.pattern < q; });
    if (it == pool.patterns.end() || !(it->pattern == p)) throw ModelError("pattern is not in the mined pool");
    ids.push_back(static_cast<std::size_t>(it - pool.patterns.begin()));
  }
  return ids;
}

LiteralChain::State literal_state_of(const PatternSet& set, const DatasetIndex& index) {
  LiteralChain::State s;
  for (const auto& p : set.patterns()) {
    LiteralChain::Ids ids;
    for (const auto& lit : p.literals()) {
      const auto id = index.literal_id(lit);
      if (!id) throw ModelError("pattern literal outside the index universe");
      ids.push_back(static_cast<std::uint32_t>(*id));
    }
    s.push_back(std::move(ids));
  }
  return s;
}

void count_cliques(std::span<const Literal> group, std::size_t start, std::vector<std::size_t>& chosen,
                   std::size_t max_length, std::vector<std::size_t>& counts) {
  for (std::size_t i = start; i < group.size(); ++i) {
    bool ok = true;
    for (std::size_t j : chosen) ok = ok && !literals_conflict(group[j], group[i]);
    if (!ok) continue;
    chosen.push_back(i);
    ++counts[chosen.size()];
    if (chosen.size() < max_length) count_cliques(group, i + 1, chosen, max_length, counts);
    chosen.pop_back();
  }
}

void enumerate_from(const DatasetIndex& index, std::size_t start, std::vector<std::size_t>& chosen,
                    std::size_t max_length, std::vector<Pattern>& out) {
  const auto universe = index.universe();
  for (std::size_t i = start; i < universe.size(); ++i) {
    bool ok = true;
    for (std::size_t j : chosen) ok = ok && !literals_conflict(universe[j], universe[i]);
    if (!ok) continue;
    chosen.push_back(i);
    out.push_back(Pattern::from_ids(chosen, index));
    if (chosen.size() < max_length) enumerate_from(index, i + 1, chosen, max_length, out);
    chosen.pop_back();
  }
}

}  // namespace

std::string_view to_string(SearchLevel level) { return level == SearchLevel::kPattern ? "pattern" : "literal"; }

SearchLevel parse_search_level(std::string_view text) {
  if (text == "pattern") return SearchLevel::kPattern;
  if (text == "literal") return SearchLevel::kLiteral;
  throw ConfigError("unknown search level '" + std::string(text) + "' (expected pattern or literal)");
}

void SAConfig::validate() const {
  if (max_steps < 1) throw ConfigError("search: max_steps must be >= 1");
  if (!(explore_p >= 0.0 && explore_p <= 1.0)) throw ConfigError("search: explore_p must lie in [0, 1]");
  if (restarts < 1) throw ConfigError("search: restarts must be >= 1");
  if (!(t0 > 0.0) || !std::isfinite(t0)) throw ConfigError("search: t0 must be positive");
  if (literal_max_length < 1) throw ConfigError("search: literal_max_length must be >= 1");
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end())) throw ConfigError("search: checkpoints must be ascending");
}

std::size_t default_thread_count() {
  if (const char* env = std::getenv("BOA_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

std::vector<std::size_t> count_conjunctions(std::span<const Literal> universe, std::size_t max_length) {
  // Literals on different attributes never conflict, so the counts factor
  // into a product of per-attribute polynomials.
  std::vector<std::size_t> poly(max_length + 1, 0);
  poly[0] = 1;
  std::size_t i = 0;
  while (i < universe.size()) {
    std::size_t j = i;
    while (j < universe.size() && universe[j].attribute == universe[i].attribute) ++j;
    std::vector<std::size_t> group(max_length + 1, 0);
    group[0] = 1;
    std::vector<std::size_t> chosen;
    count_cliques(universe.subspan(i, j - i), 0, chosen, max_length, group);
    std::vector<std::size_t> next(max_length + 1, 0);
    for (std::size_t a = 0; a <= max_length; ++a) {
      for (std::size_t b = 0; a + b <= max_length; ++b) next[a + b] += poly[a] * group[b];
    }
    poly = std::move(next);
    i = j;
  }
  return {poly.begin() + 1, poly.end()};
}

std::vector<Pattern> enumerate_conjunctions(const DatasetIndex& index, std::size_t max_length) {
  std::vector<Pattern> out;
  std::vector<std::size_t> chosen;
  if (max_length > 0) enumerate_from(index, 0, chosen, max_length, out);
  std::sort(out.begin(), out.end());
  return out;
}

SearchResult sa_search(const DatasetIndex& index, const MinedPool* pool, const ModelParams& params, const SAConfig& sa) {
  sa.validate();
  const double lambda_m = params.poisson.lambda_m;
  if (sa.level == SearchLevel::kPattern) {
    if (pool == nullptr || pool->empty()) throw ModelError("pattern-level search needs a non-empty pool");
    return run_search<PatternChain>(
        index, params, sa, pool, [&](const Scorer& s) { return PatternChain(s, *pool); },
        [&](Rng& rng) { return init_pattern_ids(pool->size(), lambda_m, rng); });
  }
  return run_search<LiteralChain>(
      index, params, sa, nullptr, [&](const Scorer& s) { return LiteralChain(s, sa.literal_max_length); },
      [&](Rng& rng) { return init_literal_state(index.universe().size(), lambda_m, rng); });
}

PatternSet propose_pattern_level(const PatternSet& current, Action action, const MinedPool& pool,
                                 const DatasetIndex& index, const ModelParams& params, double p, Rng& rng) {
  if (pool.empty()) throw ModelError("pattern-level proposal needs a non-empty pool");
  const Scorer scorer(index, params);
  PatternChain chain(scorer, pool);
  chain.reset(pool_ids_of(current, pool));
  const auto mv = chain.propose(action, p, rng);
  return chain.materialize(chain.after(mv));
}

PatternSet propose_literal_level(const PatternSet& current, Action action, const DatasetIndex& index,
                                 const ModelParams& params, double p, std::size_t max_length, Rng& rng) {
  const Scorer scorer(index, params);
  LiteralChain chain(scorer, max_length);
  chain.reset(literal_state_of(current, index));
  const auto mv = chain.propose(action, p, rng);
  return chain.materialize(chain.after(mv));
}

PatternSet random_init(SearchLevel level, const MinedPool* pool, const DatasetIndex& index, double lambda_m, Rng& rng) {
  std::vector<Pattern> ps;
  if (level == SearchLevel::kPattern) {
    if (pool == nullptr) throw ModelError("pattern-level init needs a pool");
    for (std::size_t id : init_pattern_ids(pool->size(), lambda_m, rng)) ps.push_back(pool->patterns[id].pattern);
  } else {
    for (std::size_t id : init_pattern_ids(index.universe().size(), lambda_m, rng)) {
      const std::size_t one[] = {id};
      ps.push_back(Pattern::from_ids(one, index));
    }
  }
  return PatternSet(std::move(ps));
}

ExhaustiveResult exhaustive_map(std::span<const Pattern> candidates_in, const DatasetIndex& index,
                                const ModelParams& params, std::size_t max_set_size) {
  std::vector<Pattern> cand(candidates_in.begin(), candidates_in.end());
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  const std::size_t n = cand.size();
  const std::size_t kmax = std::min(max_set_size, n);

  // Subset count with saturation at the limit.
  std::size_t total = 0;
  double binom = 1.0;
  for (std::size_t k = 0; k <= kmax; ++k) {
    if (k > 0) binom = binom * static_cast<double>(n - k + 1) / static_cast<double>(k);
    total += static_cast<std::size_t>(std::min(binom, static_cast<double>(kExhaustiveLimit) + 1.0));
    if (total > kExhaustiveLimit) {
      throw ConfigError("exhaustive search would score more than " + std::to_string(kExhaustiveLimit) + " subsets");
    }
  }

  ExhaustiveResult result;
  result.score = score(PatternSet{}, index, params);
  result.evaluated = 1;
  std::vector<std::size_t> idx;
  for (std::size_t k = 1; k <= kmax; ++k) {
    idx.resize(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    while (true) {
      std::vector<Pattern> members;
      members.reserve(k);
      for (std::size_t i : idx) members.push_back(cand[i]);
      PatternSet set(std::move(members));
      const Score s = score(set, index, params);
      ++result.evaluated;
      if (s.log_joint > result.score.log_joint) {
        result.score = s;
        result.best = std::move(set);
      }
      std::size_t pos = k;
      while (pos > 0 && idx[pos - 1] == n - k + pos - 1) --pos;
      if (pos == 0) break;
      ++idx[pos - 1];
      for (std::size_t i = pos; i < k; ++i) idx[i] = idx[i - 1] + 1;
    }
  }
  return result;
}

}  // namespace boa
