#include "seqbn/statstore.hpp"

#include <algorithm>
#include <limits>
#include <ostream>

#include "seqbn/errors.hpp"

namespace seqbn {

FamilyKey::FamilyKey(std::vector<int> vars) : vars_(std::move(vars))
{
    if (vars_.empty())
        throw StructuralError("family key must be non-empty");
    std::sort(vars_.begin(), vars_.end());
    if (std::adjacent_find(vars_.begin(), vars_.end()) != vars_.end())
        throw StructuralError("family key has duplicate variables");
}

FamilyKey FamilyKey::family(int child, std::span<const int> parents)
{
    std::vector<int> vars(parents.begin(), parents.end());
    vars.push_back(child);
    return FamilyKey(std::move(vars));
}

bool FamilyKey::contains(int var) const
{
    return std::binary_search(vars_.begin(), vars_.end(), var);
}

bool FamilyKey::is_subset_of(const FamilyKey& other) const
{
    return std::includes(other.vars_.begin(), other.vars_.end(), vars_.begin(), vars_.end());
}

std::string FamilyKey::csv() const
{
    std::string out;
    for (std::size_t i = 0; i < vars_.size(); ++i) {
        if (i)
            out += ',';
        out += std::to_string(vars_[i]);
    }
    return out;
}

StatisticsRecord make_record(const VariableTable& vars, FamilyKey key, std::int64_t birth_index, std::size_t cell_limit)
{
    for (int v : key.vars())
        if (v < 0 || v >= vars.size())
            throw StructuralError("family key refers to unknown variable " + std::to_string(v));
    // Multiply with an overflow check against the limit.
    std::size_t cells = 1;
    for (int v : key.vars()) {
        cells *= static_cast<std::size_t>(vars.cardinality(v));
        if (cells > cell_limit)
            throw StructuralError("record over {" + key.csv() + "} exceeds the cell limit of " +
                                  std::to_string(cell_limit));
    }
    StatisticsRecord rec;
    rec.key = std::move(key);
    rec.counts.assign(cells, 0.0);
    rec.birth_index = birth_index;
    return rec;
}

StatisticsRecord marginalize(const VariableTable& vars, const StatisticsRecord& rec, const FamilyKey& sub)
{
    if (!sub.is_subset_of(rec.key))
        throw StructuralError("{" + sub.csv() + "} is not a subset of {" + rec.key.csv() + "}");
    if (sub == rec.key)
        return rec;
    StatisticsRecord out;
    out.key = sub;
    out.counts.assign(joint_state_count(vars, sub.vars()), 0.0);
    out.absorbed = rec.absorbed;
    out.birth_index = rec.birth_index;
    Instance scratch(static_cast<std::size_t>(vars.size()), 0);
    for (std::size_t idx = 0; idx < rec.counts.size(); ++idx) {
        decode_index(vars, rec.key.vars(), idx, scratch);
        out.counts[projected_index(vars, sub.vars(), scratch)] += rec.counts[idx];
    }
    return out;
}

void absorb_into(const VariableTable& vars, StatisticsRecord& rec, const Instance& inst, double weight)
{
    rec.counts[projected_index(vars, rec.key.vars(), inst)] += weight;
    rec.absorbed += weight;
}

StatisticsRecord count_records(const VariableTable& vars, const FamilyKey& key, std::span<const Instance> data)
{
    StatisticsRecord rec = make_record(vars, key, 0, std::numeric_limits<std::size_t>::max());
    for (const auto& inst : data)
        rec.counts[projected_index(vars, key.vars(), inst)] += 1.0;
    rec.absorbed = static_cast<double>(data.size());
    return rec;
}

// ---------------------------------------------------------------------------

StatisticsStore::StatisticsStore(VariableTable vars, std::size_t cell_limit)
    : vars_(std::move(vars)), cell_limit_(cell_limit)
{
}

void StatisticsStore::add_key(const FamilyKey& key)
{
    if (!records_.contains(key))
        records_.emplace(key, make_record(vars_, key, counter_, cell_limit_));
}

void StatisticsStore::insert(StatisticsRecord rec)
{
    FamilyKey key = rec.key;
    records_.insert_or_assign(std::move(key), std::move(rec));
}

void StatisticsStore::absorb(const Instance& inst, double weight)
{
    if (static_cast<int>(inst.size()) != vars_.size())
        throw StructuralError("instance dimension does not match the store");
    for (auto& [key, rec] : records_)
        absorb_into(vars_, rec, inst, weight);
    ++counter_;
}

void StatisticsStore::update_each(const std::function<void(StatisticsRecord&)>& fn)
{
    for (auto& [key, rec] : records_)
        fn(rec);
    ++counter_;
}

void StatisticsStore::retarget(const std::set<FamilyKey>& keep,
                               const std::function<void(StatisticsRecord&)>& init_fresh)
{
    std::erase_if(records_, [&](const auto& entry) { return !keep.contains(entry.first); });
    std::vector<StatisticsRecord> created;
    for (const auto& key : keep) {
        if (records_.contains(key))
            continue;
        if (const StatisticsRecord* super = best_superset(key)) {
            created.push_back(marginalize(vars_, *super, key));
        } else {
            created.push_back(make_record(vars_, key, counter_, cell_limit_));
            if (init_fresh)
                init_fresh(created.back());
        }
    }
    for (auto& rec : created)
        insert(std::move(rec));
}

const StatisticsRecord* StatisticsStore::find(const FamilyKey& key) const
{
    auto it = records_.find(key);
    return it == records_.end() ? nullptr : &it->second;
}

const StatisticsRecord* StatisticsStore::best_superset(const FamilyKey& key) const
{
    const StatisticsRecord* best = nullptr;
    for (const auto& [k, rec] : records_)
        if (key.is_subset_of(k) && (!best || rec.absorbed > best->absorbed))
            best = &rec;
    return best;
}

std::optional<StatisticsRecord> StatisticsStore::lookup(const FamilyKey& key) const
{
    if (const auto* rec = find(key))
        return *rec;
    if (const auto* super = best_superset(key))
        return marginalize(vars_, *super, key);
    return std::nullopt;
}

bool StatisticsStore::can_recover(const FamilyKey& key) const
{
    return find(key) != nullptr || best_superset(key) != nullptr;
}

std::size_t StatisticsStore::memory_units() const
{
    std::size_t units = 0;
    for (const auto& [key, rec] : records_)
        units += rec.counts.size();
    return units;
}

void StatisticsStore::dump(std::ostream& out) const
{
    for (const auto& [key, rec] : records_) {
        out << "record " << key.csv() << " birth=" << rec.birth_index << " absorbed=" << rec.absorbed << '\n';
        for (std::size_t i = 0; i < rec.counts.size(); ++i)
            out << (i ? " " : "") << rec.counts[i];
        out << '\n';
    }
}

std::set<FamilyKey> suff(const Structure& g)
{
    std::set<FamilyKey> keys;
    for (int i = 0; i < g.size(); ++i)
        keys.insert(FamilyKey::family(i, g.parents(i)));
    return keys;
}

bool can_evaluate(const Structure& g, const StatisticsStore& store)
{
    if (g.size() == 0)
        return true;
    for (const auto& key : suff(g))
        if (!store.can_recover(key))
            return false;
    return true;
}

} // namespace seqbn
