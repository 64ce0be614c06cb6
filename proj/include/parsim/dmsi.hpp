#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "parsim/bytes.hpp"

namespace parsim {

// Serializable state token circulated through all registered instances of a
// kind. Entries are kept key-sorted so the byte encoding is a function of
// content only, never of which LP wrote an entry first.
class DmsiState {
public:
    struct Request {
        std::string requester;
        std::string tag;
        Bytes args;
    };

    void put(const std::string& key, Bytes value);
    std::optional<Bytes> get(const std::string& key) const;
    bool has(const std::string& key) const;

    // Convenience for counters and small scalars.
    void put_u64(const std::string& key, std::uint64_t v);
    std::optional<std::uint64_t> get_u64(const std::string& key) const;
    void put_str(const std::string& key, const std::string& v);
    std::optional<std::string> get_str(const std::string& key) const;

    // All entries whose key starts with `prefix`, in key order.
    std::vector<std::pair<std::string, Bytes>> entries_with_prefix(const std::string& prefix) const;
    std::size_t entry_count() const { return entries_.size(); }

    // Staged request/response. Requests enqueue in stage i, get answered in
    // stage i+1, and are consumed in stage i+2. The responder callback
    // returns a response for requests it is able to answer, nullopt to skip.
    void enqueue_request(const std::string& requester, const std::string& tag, Bytes args);
    void answer_requests(const std::function<std::optional<Bytes>(const Request&)>& responder);
    // Answers only requests carrying exactly this tag; O(log n + matches).
    void answer_requests_for_tag(const std::string& tag,
                                 const std::function<std::optional<Bytes>(const Request&)>& responder);
    Bytes take_response(const std::string& requester, const std::string& tag);
    std::size_t pending_request_count() const { return requests_.size(); }

    Bytes encode() const;
    static DmsiState decode(const Bytes& b);

    bool operator==(const DmsiState& o) const {
        return entries_ == o.entries_ && responses_ == o.responses_ &&
               pending_request_keys() == o.pending_request_keys();
    }

    // Token exclusivity guard: accessors fail unless the driver marked this
    // state as currently held.
    void set_held(bool h) { held_ = h; }

private:
    void require_held() const;
    std::vector<std::pair<std::string, std::string>> pending_request_keys() const;

    std::map<std::string, Bytes> entries_;
    // key = (tag, requester); sorted so the encoding depends on content only
    std::map<std::pair<std::string, std::string>, Bytes> requests_;
    std::map<std::pair<std::string, std::string>, Bytes> responses_;
    bool held_ = true;
};

using DmsiHandler = std::function<void(int stage, DmsiState& token)>;

struct DmsiInstance {
    std::string kind;
    std::string path;
    int lp = 0;
    DmsiHandler handler;  // null for instances hosted on other LPs
};

// Registration table. Every LP registers the full instance list (local
// instances with a handler, remote ones without), so each LP derives the
// same visitation plan without communication.
class DmsiRegistry {
public:
    void register_instance(const std::string& kind, const std::string& path, int lp,
                           DmsiHandler handler);
    void seal();  // called when stage 0 begins; late registration is an error
    bool sealed() const { return sealed_; }

    std::vector<std::string> kinds() const;  // sorted
    // Instances of a kind in visitation order (path order).
    std::vector<const DmsiInstance*> plan(const std::string& kind) const;
    bool empty() const { return instances_.empty(); }

private:
    std::vector<DmsiInstance> instances_;
    bool sealed_ = false;
};

}  // namespace parsim
