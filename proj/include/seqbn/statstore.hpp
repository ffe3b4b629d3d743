#pragma once

// Sufficient-statistics records and the store that keeps them for the current
// search frontier.
//
// A record holds dense real-valued counts over every joint value of its key's
// variables (mixed radix, lowest id fastest). Counts are real so the same
// record type carries expected counts for EM. `absorbed` is the total weight
// summarized by the record and `birth_index` is the store's instance counter
// when it was created; records created at different times summarize different
// suffixes of the stream.

#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "seqbn/bn.hpp"

namespace seqbn {

class FamilyKey {
public:
    FamilyKey() = default;
    /// Sorts `vars`; throws StructuralError when empty or with duplicates.
    explicit FamilyKey(std::vector<int> vars);

    /// {child} ∪ parents.
    static FamilyKey family(int child, std::span<const int> parents);

    const std::vector<int>& vars() const { return vars_; }
    std::size_t size() const { return vars_.size(); }
    bool contains(int var) const;
    bool is_subset_of(const FamilyKey& other) const;
    std::string csv() const;

    auto operator<=>(const FamilyKey&) const = default;

private:
    std::vector<int> vars_;
};

struct StatisticsRecord {
    FamilyKey key;
    std::vector<double> counts;
    double absorbed = 0.0;
    std::int64_t birth_index = 0;
};

inline constexpr std::size_t kDefaultCellLimit = 1'000'000;

/// A zeroed record; throws StructuralError if the key exceeds `cell_limit` cells.
StatisticsRecord make_record(const VariableTable& vars, FamilyKey key, std::int64_t birth_index,
                             std::size_t cell_limit = kDefaultCellLimit);

/// Sums out the variables of rec.key not in `sub`. Keeps absorbed and birth_index.
StatisticsRecord marginalize(const VariableTable& vars, const StatisticsRecord& rec, const FamilyKey& sub);

/// Adds `weight` to the cell matching `inst`.
void absorb_into(const VariableTable& vars, StatisticsRecord& rec, const Instance& inst, double weight = 1.0);

/// One-pass batch counting of `data` over `key`.
StatisticsRecord count_records(const VariableTable& vars, const FamilyKey& key, std::span<const Instance> data);

class StatisticsStore {
public:
    using RecordMap = std::map<FamilyKey, StatisticsRecord>;

    explicit StatisticsStore(VariableTable vars, std::size_t cell_limit = kDefaultCellLimit);

    const VariableTable& variables() const { return vars_; }
    std::int64_t instances_seen() const { return counter_; }
    std::size_t size() const { return records_.size(); }
    const RecordMap& records() const { return records_; }

    /// Adds a zero record (birth = current counter) if `key` is absent.
    void add_key(const FamilyKey& key);
    void insert(StatisticsRecord rec);

    /// Updates every record with `inst` and advances the instance counter.
    void absorb(const Instance& inst, double weight = 1.0);

    /// Applies `fn` to every record and advances the instance counter.
    void update_each(const std::function<void(StatisticsRecord&)>& fn);

    /// Drops records not in `keep`, keeps surviving history, and creates the
    /// missing keys. A new key that is a subset of a surviving key is
    /// initialized by marginalization; otherwise it starts from zero with
    /// birth_index = counter, and `init_fresh` (if given) may seed it.
    void retarget(const std::set<FamilyKey>& keep,
                  const std::function<void(StatisticsRecord&)>& init_fresh = {});

    const StatisticsRecord* find(const FamilyKey& key) const;

    /// Exact record, or the marginalization of the superset with the most
    /// absorbed weight (ties to the smallest key). nullopt if unrecoverable.
    std::optional<StatisticsRecord> lookup(const FamilyKey& key) const;
    bool can_recover(const FamilyKey& key) const;

    /// Stored numbers: the sum of all count-vector lengths.
    std::size_t memory_units() const;

    /// Debug snapshot: `record <key-csv> birth=<n> absorbed=<w>` then the counts.
    void dump(std::ostream& out) const;

private:
    const StatisticsRecord* best_superset(const FamilyKey& key) const;

    VariableTable vars_;
    std::size_t cell_limit_;
    RecordMap records_;
    std::int64_t counter_ = 0;
};

/// One key per variable: {X_i} ∪ pa(X_i); identical variable sets collapse.
std::set<FamilyKey> suff(const Structure& g);

/// True iff every key of suff(g) is present in the store or is a subset of a present key.
bool can_evaluate(const Structure& g, const StatisticsStore& store);

} // namespace seqbn
