#include "flowfl/stigmergy.hpp"

namespace flowfl::stigmergy {

const StigTuple& Replica::write(const std::string& key, Bytes value) {
    auto [it, inserted] = store_.try_emplace(key);
    StigTuple& t = it->second;
    const std::uint64_t previous = inserted ? 0 : t.lamport;
    t.key = key;
    t.value = std::move(value);
    t.lamport = previous + 1;
    t.writer = owner_;
    outbox_.push_back(t);
    return t;
}

std::optional<Bytes> Replica::read(const std::string& key) {
    auto it = store_.find(key);
    if (it == store_.end()) return std::nullopt;
    outbox_.push_back(it->second);
    return it->second.value;
}

const StigTuple* Replica::peek(const std::string& key) const {
    auto it = store_.find(key);
    return it == store_.end() ? nullptr : &it->second;
}

bool Replica::on_message(const StigTuple& incoming) {
    auto it = store_.find(incoming.key);
    if (it == store_.end() || supersedes(incoming, it->second)) {
        store_.insert_or_assign(incoming.key, incoming);
        outbox_.push_back(incoming);
        return true;
    }
    if (supersedes(it->second, incoming)) {
        // The sender is behind; push our newer copy back.
        outbox_.push_back(it->second);
    }
    return false;
}

void Replica::push_matching(const std::function<bool(const std::string&)>& pred) {
    for (const auto& [key, t] : store_)
        if (pred(key)) outbox_.push_back(t);
}

std::vector<StigTuple> Replica::drain_outbox() {
    std::map<std::string, StigTuple> latest;
    for (auto& t : outbox_) {
        auto it = latest.find(t.key);
        if (it == latest.end() || !supersedes(it->second, t)) latest.insert_or_assign(t.key, std::move(t));
    }
    outbox_.clear();
    std::vector<StigTuple> out;
    out.reserve(latest.size());
    for (auto& [k, t] : latest) out.push_back(std::move(t));
    return out;
}

std::vector<const StigTuple*> Replica::with_prefix(const std::string& prefix) const {
    std::vector<const StigTuple*> out;
    for (auto it = store_.lower_bound(prefix); it != store_.end(); ++it) {
        if (it->first.compare(0, prefix.size(), prefix) != 0) break;
        out.push_back(&it->second);
    }
    return out;
}

}  // namespace flowfl::stigmergy
