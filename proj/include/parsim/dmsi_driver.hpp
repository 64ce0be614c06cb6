#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "parsim/dmsi.hpp"
#include "parsim/inbox.hpp"
#include "parsim/kernel.hpp"

namespace parsim {

// Drives distributed multi-stage initialization on one LP. Within each
// stage, every registered kind's token visits all instances in plan order,
// hopping between LPs over the transport; unregistered modules then run
// init(s) locally in path order; a global barrier ends the stage.
class DmsiDriver {
public:
    // inbox may be null when the whole simulation runs on a single LP.
    DmsiDriver(Kernel& kernel, DmsiRegistry& registry, EnvelopeInbox* inbox, int my_lp,
               int n_lps)
        : kernel_(kernel), registry_(registry), inbox_(inbox), my_lp_(my_lp), n_lps_(n_lps) {}

    void run_all(int num_stages);

    // Token sends performed by this LP (wrap carries included).
    std::uint64_t transport_hops() const { return hops_; }

    // Tokens resting on this LP after the last stage (each kind's token ends
    // at the LP of its last plan instance).
    const std::map<std::string, DmsiState>& final_tokens() const { return tokens_; }

    void barrier(std::uint64_t round);

private:
    void walk_kind(const std::string& kind, int stage, int num_stages);

    Kernel& kernel_;
    DmsiRegistry& registry_;
    EnvelopeInbox* inbox_;
    int my_lp_;
    int n_lps_;
    std::uint64_t hops_ = 0;
    std::map<std::string, DmsiState> tokens_;
};

}  // namespace parsim
