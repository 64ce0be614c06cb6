#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "parsim/message.hpp"
#include "parsim/time.hpp"

namespace parsim {

// Dense module identifier. Ids are indices into a PathTable built from the
// sorted list of all module paths of the scenario, so id order equals
// lexicographic path order on every LP, independent of the partitioning.
using ModuleId = std::uint32_t;

class PathTable {
public:
    // Paths are sorted and deduplicated; ids follow the sorted order.
    explicit PathTable(std::vector<std::string> paths) : paths_(std::move(paths)) {
        std::sort(paths_.begin(), paths_.end());
        paths_.erase(std::unique(paths_.begin(), paths_.end()), paths_.end());
        for (std::size_t i = 0; i < paths_.size(); ++i)
            index_[paths_[i]] = static_cast<ModuleId>(i);
    }
    PathTable() = default;

    ModuleId id_of(const std::string& path) const {
        auto it = index_.find(path);
        if (it == index_.end()) throw std::invalid_argument("unknown module path: " + path);
        return it->second;
    }
    const std::string& path_of(ModuleId id) const { return paths_.at(id); }
    bool contains(const std::string& path) const { return index_.count(path) != 0; }
    std::size_t size() const { return paths_.size(); }

private:
    std::vector<std::string> paths_;
    std::unordered_map<std::string, ModuleId> index_;
};

// Deterministic total order over all events of a run: time first, then
// target path, sender path, and the per-sender sequence counter. The key is
// a pure function of the event, never of arrival order, which is what makes
// sequential and parallel traces comparable line by line.
struct OrderKey {
    std::int64_t ticks;
    ModuleId target;
    ModuleId sender;
    std::uint64_t sender_seq;

    auto operator<=>(const OrderKey&) const = default;
};

struct Event {
    SimTime time;
    ModuleId target = 0;
    ModuleId sender = 0;
    std::uint64_t sender_seq = 0;
    Message payload;

    OrderKey key() const { return OrderKey{time.ticks(), target, sender, sender_seq}; }
};

inline OrderKey total_order_key(const Event& e) { return e.key(); }

}  // namespace parsim
