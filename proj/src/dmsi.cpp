#include "parsim/dmsi.hpp"

#include <algorithm>
#include <stdexcept>

namespace parsim {

void DmsiState::require_held() const {
    if (!held_) throw std::logic_error("DMSI state accessed without holding the token");
}

void DmsiState::put(const std::string& key, Bytes value) {
    require_held();
    entries_[key] = std::move(value);
}

std::optional<Bytes> DmsiState::get(const std::string& key) const {
    require_held();
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

bool DmsiState::has(const std::string& key) const {
    require_held();
    return entries_.count(key) != 0;
}

void DmsiState::put_u64(const std::string& key, std::uint64_t v) {
    ByteWriter w;
    w.u64(v);
    put(key, w.take());
}

std::optional<std::uint64_t> DmsiState::get_u64(const std::string& key) const {
    auto b = get(key);
    if (!b) return std::nullopt;
    ByteReader r(*b);
    return r.u64();
}

void DmsiState::put_str(const std::string& key, const std::string& v) {
    ByteWriter w;
    w.str(v);
    put(key, w.take());
}

std::optional<std::string> DmsiState::get_str(const std::string& key) const {
    auto b = get(key);
    if (!b) return std::nullopt;
    ByteReader r(*b);
    return r.str();
}

std::vector<std::pair<std::string, Bytes>> DmsiState::entries_with_prefix(
    const std::string& prefix) const {
    require_held();
    std::vector<std::pair<std::string, Bytes>> out;
    for (auto it = entries_.lower_bound(prefix); it != entries_.end(); ++it) {
        if (it->first.compare(0, prefix.size(), prefix) != 0) break;
        out.emplace_back(it->first, it->second);
    }
    return out;
}

void DmsiState::enqueue_request(const std::string& requester, const std::string& tag,
                                Bytes args) {
    require_held();
    auto key = std::make_pair(tag, requester);
    if (requests_.count(key))
        throw std::logic_error("duplicate DMSI request from " + requester + " tag " + tag);
    requests_[key] = std::move(args);
}

void DmsiState::answer_requests(
    const std::function<std::optional<Bytes>(const Request&)>& responder) {
    require_held();
    for (auto it = requests_.begin(); it != requests_.end();) {
        Request r{it->first.second, it->first.first, it->second};
        std::optional<Bytes> resp = responder(r);
        if (resp) {
            responses_[std::make_pair(r.requester, r.tag)] = std::move(*resp);
            it = requests_.erase(it);
        } else {
            ++it;
        }
    }
}

void DmsiState::answer_requests_for_tag(
    const std::string& tag,
    const std::function<std::optional<Bytes>(const Request&)>& responder) {
    require_held();
    auto it = requests_.lower_bound(std::make_pair(tag, std::string()));
    while (it != requests_.end() && it->first.first == tag) {
        Request r{it->first.second, it->first.first, it->second};
        std::optional<Bytes> resp = responder(r);
        if (resp) {
            responses_[std::make_pair(r.requester, r.tag)] = std::move(*resp);
            it = requests_.erase(it);
        } else {
            ++it;
        }
    }
}

Bytes DmsiState::take_response(const std::string& requester, const std::string& tag) {
    require_held();
    auto it = responses_.find(std::make_pair(requester, tag));
    if (it == responses_.end())
        throw std::runtime_error("unanswered DMSI request: requester=" + requester +
                                 " tag=" + tag);
    Bytes b = std::move(it->second);
    responses_.erase(it);
    return b;
}

std::vector<std::pair<std::string, std::string>> DmsiState::pending_request_keys() const {
    std::vector<std::pair<std::string, std::string>> keys;
    for (const auto& [k, v] : requests_) keys.emplace_back(k.second, k.first);
    return keys;
}

Bytes DmsiState::encode() const {
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(entries_.size()));
    for (const auto& [k, v] : entries_) {
        w.str(k);
        w.blob(v);
    }
    w.u32(static_cast<std::uint32_t>(requests_.size()));
    for (const auto& [k, v] : requests_) {
        w.str(k.second);
        w.str(k.first);
        w.blob(v);
    }
    w.u32(static_cast<std::uint32_t>(responses_.size()));
    for (const auto& [k, v] : responses_) {
        w.str(k.first);
        w.str(k.second);
        w.blob(v);
    }
    return w.take();
}

DmsiState DmsiState::decode(const Bytes& b) {
    DmsiState s;
    ByteReader r(b);
    std::uint32_t n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
        std::string k = r.str();
        s.entries_[k] = r.blob();
    }
    n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
        std::string requester = r.str();
        std::string tag = r.str();
        s.requests_[std::make_pair(tag, requester)] = r.blob();
    }
    n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
        std::string a = r.str();
        std::string t = r.str();
        s.responses_[std::make_pair(a, t)] = r.blob();
    }
    return s;
}

void DmsiRegistry::register_instance(const std::string& kind, const std::string& path, int lp,
                                     DmsiHandler handler) {
    if (sealed_)
        throw std::logic_error("DMSI registration after stage 0 began: " + kind + "/" + path);
    for (const DmsiInstance& i : instances_)
        if (i.kind == kind && i.path == path)
            throw std::logic_error("duplicate DMSI registration: " + kind + "/" + path);
    instances_.push_back(DmsiInstance{kind, path, lp, std::move(handler)});
}

void DmsiRegistry::seal() { sealed_ = true; }

std::vector<std::string> DmsiRegistry::kinds() const {
    std::vector<std::string> ks;
    for (const DmsiInstance& i : instances_)
        if (std::find(ks.begin(), ks.end(), i.kind) == ks.end()) ks.push_back(i.kind);
    std::sort(ks.begin(), ks.end());
    return ks;
}

std::vector<const DmsiInstance*> DmsiRegistry::plan(const std::string& kind) const {
    std::vector<const DmsiInstance*> out;
    for (const DmsiInstance& i : instances_)
        if (i.kind == kind) out.push_back(&i);
    std::sort(out.begin(), out.end(),
              [](const DmsiInstance* a, const DmsiInstance* b) { return a->path < b->path; });
    return out;
}

}  // namespace parsim
