#include "parsim/dmsi_driver.hpp"

#include <stdexcept>

namespace parsim {

void DmsiDriver::run_all(int num_stages) {
    registry_.seal();
    for (SimModule* m : kernel_.local_modules())
        if (m->num_init_stages() > num_stages)
            throw std::logic_error("module " + m->path() + " requests init stage beyond " +
                                   std::to_string(num_stages));
    for (int s = 0; s < num_stages; ++s) {
        for (const std::string& kind : registry_.kinds()) walk_kind(kind, s, num_stages);
        for (SimModule* m : kernel_.local_modules())
            if (s < m->num_init_stages()) m->init(s);
        barrier(static_cast<std::uint64_t>(s));
    }
}

void DmsiDriver::walk_kind(const std::string& kind, int stage, int num_stages) {
    auto plan = registry_.plan(kind);
    if (plan.empty()) return;
    for (std::size_t i = 0; i < plan.size(); ++i) {
        const DmsiInstance* inst = plan[i];
        if (inst->lp != my_lp_) continue;
        auto it = tokens_.find(kind);
        if (it == tokens_.end()) {
            if (stage == 0 && i == 0) {
                it = tokens_.emplace(kind, DmsiState{}).first;
            } else {
                if (!inbox_)
                    throw std::logic_error("DMSI token for " + kind +
                                           " not resident and no transport configured");
                TaggedEnvelope e = inbox_->recv_match([&](const TaggedEnvelope& te) {
                    if (te.env.kind != WireEnvelope::Kind::dmsi_token) return false;
                    TokenPayload p = TokenPayload::decode(te.env.payload);
                    return p.kind_name == kind && static_cast<int>(p.stage) == stage;
                });
                TokenPayload p = TokenPayload::decode(e.env.payload);
                it = tokens_.emplace(kind, DmsiState::decode(p.state)).first;
            }
        }
        DmsiState& token = it->second;
        if (!inst->handler)
            throw std::logic_error("local DMSI instance without handler: " + inst->path);
        token.set_held(true);
        inst->handler(stage, token);
        token.set_held(false);
        // Next holder: the following instance of this stage, or the first
        // instance again when the stage's walk is over (carry for stage+1).
        const DmsiInstance* next = (i + 1 < plan.size()) ? plan[i + 1] : plan[0];
        bool last_visit_overall = (stage == num_stages - 1) && (i + 1 == plan.size());
        if (next->lp != my_lp_ && !last_visit_overall) {
            TokenPayload p;
            p.kind_name = kind;
            p.stage = static_cast<std::uint32_t>((i + 1 < plan.size()) ? stage : stage + 1);
            p.state = token.encode();
            WireEnvelope env;
            env.kind = WireEnvelope::Kind::dmsi_token;
            env.ticks = p.stage;
            env.payload = p.encode();
            inbox_->send(next->lp, env);
            tokens_.erase(it);
            ++hops_;
        }
    }
}

void DmsiDriver::barrier(std::uint64_t round) {
    if (n_lps_ <= 1 || !inbox_) return;
    auto is_ctrl = [&](const TaggedEnvelope& te, CtrlKind want) {
        if (te.env.kind != WireEnvelope::Kind::barrier) return false;
        return CtrlPayload::decode(te.env.payload).kind == want &&
               CtrlPayload::decode(te.env.payload).round == round;
    };
    if (my_lp_ == 0) {
        for (int i = 0; i < n_lps_ - 1; ++i)
            inbox_->recv_match([&](const TaggedEnvelope& te) {
                return is_ctrl(te, CtrlKind::barrier_arrive);
            });
        CtrlPayload p;
        p.kind = CtrlKind::barrier_release;
        p.round = round;
        WireEnvelope env;
        env.kind = WireEnvelope::Kind::barrier;
        env.payload = p.encode();
        for (int lp = 1; lp < n_lps_; ++lp) inbox_->send(lp, env);
    } else {
        CtrlPayload p;
        p.kind = CtrlKind::barrier_arrive;
        p.round = round;
        WireEnvelope env;
        env.kind = WireEnvelope::Kind::barrier;
        env.payload = p.encode();
        inbox_->send(0, env);
        inbox_->recv_match(
            [&](const TaggedEnvelope& te) { return is_ctrl(te, CtrlKind::barrier_release); });
    }
}

}  // namespace parsim
