#include "bpi/epi/engine.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <map>
#include <random>
#include <sstream>
#include <unordered_set>

namespace bpi::epi {

namespace {

std::string template_of(const std::string& name) {
    const auto pos = name.find('#');
    return pos == std::string::npos ? name : name.substr(0, pos);
}

std::uint64_t suffix_number(const std::string& name) {
    const auto pos = name.rfind('#');
    if (pos == std::string::npos || pos + 1 == name.size()) return 0;
    std::uint64_t n = 0;
    for (std::size_t i = pos + 1; i < name.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(name[i]))) return 0;
        n = n * 10 + static_cast<std::uint64_t>(name[i] - '0');
    }
    return n + 1;
}

const Action* head_action(const Thread& t) {
    const auto* a = t.head.as<Act>();
    return a ? &a->action : nullptr;
}

std::optional<std::string> base_name(const ChannelId& c) {
    if (const auto* n = c.base.as<TName>()) return n->id;
    return std::nullopt;
}

// nullopt: not decidable now. Throws TermError when a side cannot be evaluated.
std::optional<bool> decide(const Match& m) {
    const Term l = eval_term(m.lhs);
    const Term r = eval_term(m.rhs);
    const auto* ln = l.as<TNum>();
    const auto* rn = r.as<TNum>();
    if (ln && rn) {
        switch (m.cmp) {
            case Cmp::Lt: return ln->value < rn->value;
            case Cmp::Gt: return ln->value > rn->value;
            case Cmp::Le: return ln->value <= rn->value;
            case Cmp::Ge: return ln->value >= rn->value;
            case Cmp::Eq: return ln->value == rn->value;
            case Cmp::Ne: return ln->value != rn->value;
        }
    }
    if (m.cmp == Cmp::Eq) return l == r;
    if (m.cmp == Cmp::Ne) return l != r;
    return std::nullopt;
}

std::vector<std::uint64_t> participant_ids(const Config& c, const Redex& r) {
    std::vector<std::uint64_t> ids{c.threads[r.initiator].id};
    for (auto i : r.receivers) ids.push_back(c.threads[i].id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::string render_thread(const Thread& t, const Substitution& s) {
    std::string out;
    if (t.replicated) out += '!';
    out.append(t.bullets, '*');
    out += pretty(subst(t.head, s));
    return out;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

struct KeyHash {
    std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& k) const {
        return static_cast<std::size_t>(k.first ^ (k.second * 0x9e3779b97f4a7c15ULL));
    }
};


// A syntactic over-approximation of the actions a thread may ever perform.
struct Pat {
    Action::Kind kind;
    std::string base;  // empty: a variable, which may be bound to any transmitted name
    int suffix;        // -1: none, else Label::Kind
    std::string index; // Index labels only; empty when unknown
};

struct ThreadInfo {
    std::vector<Pat> pats;
    std::set<std::string> sent;  // free names transmitted as arguments
};

// Names restricted inside the thread are fresh when created and cannot
// coincide with an existing channel, so their actions are skipped.
void collect_info(const Process& p, std::set<std::string>& bound, ThreadInfo& out) {
    if (const auto* x = p.as<Par>()) {
        collect_info(x->left, bound, out);
        collect_info(x->right, bound, out);
    } else if (const auto* x = p.as<Repl>()) {
        collect_info(x->body, bound, out);
    } else if (const auto* x = p.as<Bullet>()) {
        collect_info(x->body, bound, out);
    } else if (const auto* x = p.as<New>()) {
        const bool fresh = bound.insert(x->name).second;
        collect_info(x->body, bound, out);
        if (fresh) bound.erase(x->name);
    } else if (const auto* x = p.as<Match>()) {
        collect_info(x->then_p, bound, out);
        collect_info(x->else_p, bound, out);
    } else if (const auto* x = p.as<Act>()) {
        const ChannelId& ch = x->action.channel;
        for (const auto& t : x->action.args) {
            std::set<std::string> names;
            collect_term_names(t, names);
            for (const auto& n : names)
                if (!bound.contains(n)) out.sent.insert(n);
        }
        Pat pat{x->action.kind, {}, -1, {}};
        bool keep = ch.base.is<TVar>();
        if (const auto* n = ch.base.as<TName>()) {
            keep = !bound.contains(n->id);
            pat.base = n->id;
        }
        if (ch.suffix) {
            pat.suffix = static_cast<int>(ch.suffix->kind);
            if (ch.suffix->kind == Label::Kind::Index)
                if (const auto* num = ch.suffix->index.as<TNum>()) pat.index = num->value.str();
        }
        if (keep) out.pats.push_back(std::move(pat));
        collect_info(x->cont, bound, out);
    }
}

class PatternCache {
   public:
    const ThreadInfo& get(const Process& p) {
        auto it = cache_.find(&p.node());
        if (it != cache_.end()) return it->second.second;
        if (cache_.size() > 200'000) cache_.clear();
        ThreadInfo info;
        std::set<std::string> bound;
        collect_info(p, bound, info);
        return cache_.emplace(&p.node(), std::make_pair(p, std::move(info))).first->second.second;
    }

   private:
    std::unordered_map<const ProcNode*, std::pair<Process, ThreadInfo>> cache_;
};

bool persistent(const Config& c, const Redex& r, PatternCache& cache) {
    if (r.kind == RedexKind::Then || r.kind == RedexKind::Else) return true;
    const Thread& init = c.threads[r.initiator];
    const ChannelId& ch = init.head.as<Act>()->action.channel;
    const std::string base = ch.base.as<TName>()->id;
    if (!c.restricted.contains(base)) return false;
    const int suffix = ch.suffix ? static_cast<int>(ch.suffix->kind) : -1;
    std::string index;
    if (ch.suffix && ch.suffix->kind == Label::Kind::Index) index = r.channel.substr(base.size() + 1);

    bool guard_senders = false;    // a consumable receiver is involved
    const bool guard_receivers = true;
    if (r.kind == RedexKind::Comm) {
        guard_senders = !c.threads[r.receivers[0]].replicated;
        if (init.replicated && !guard_senders) return true;
    } else {
        for (auto i : r.receivers) guard_senders |= !c.threads[i].replicated;
    }
    const bool sender_consumable = !init.replicated || r.kind == RedexKind::Broad;

    bool leaked = false;
    for (const auto& t : c.threads)
        if (cache.get(t.head).sent.contains(base)) {
            leaked = true;
            break;
        }
    auto conflicts = [&](const Pat& p) {
        if (p.base.empty() ? !leaked : p.base != base) return false;
        if (p.suffix != suffix) return false;
        if (suffix == static_cast<int>(Label::Kind::Index) && !p.index.empty() && p.index != index) return false;
        if (p.kind == Action::Kind::Recv) return guard_receivers && sender_consumable;
        return guard_senders;
    };
    std::vector<bool> part(c.threads.size(), false);
    part[r.initiator] = true;
    for (auto i : r.receivers) part[i] = true;
    for (std::size_t i = 0; i < c.threads.size(); ++i) {
        const Thread& t = c.threads[i];
        if (part[i] && !t.replicated) continue;
        const Process& scope = part[i] ? t.head.as<Act>()->cont : t.head;
        for (const auto& p : cache.get(scope).pats)
            if (conflicts(p)) return false;
    }
    return true;
}

}  // namespace

std::size_t spawn(Config& c, const Process& p, std::uint64_t depth, unsigned bullets) {
    if (p.is<Nil>()) return bullets;
    if (const auto* x = p.as<Par>()) return spawn(c, x->left, depth, bullets) + spawn(c, x->right, depth, 0);
    if (const auto* x = p.as<Bullet>()) return spawn(c, x->body, depth, bullets + 1);
    if (const auto* x = p.as<New>()) {
        const std::string fresh = template_of(x->name) + "#" + std::to_string(c.next_name++);
        c.restricted.insert(fresh);
        Substitution s;
        s.names[x->name] = fresh;
        return spawn(c, subst(x->body, s), depth, bullets);
    }
    if (const auto* x = p.as<Repl>()) {
        Process body = x->body;
        for (;;) {
            if (const auto* b = body.as<Bullet>()) {
                ++bullets;
                body = b->body;
            } else if (const auto* r = body.as<Repl>()) {
                body = r->body;
            } else {
                break;
            }
        }
        if (!body.is<Act>()) throw NormalizeError("replicated process is not action-guarded: !" + pretty(body));
        c.threads.push_back(Thread{c.next_thread++, body, true, bullets, depth});
        return 0;
    }
    c.threads.push_back(Thread{c.next_thread++, p, false, bullets, depth});
    return 0;
}

Config normalize(const Process& p) {
    Config c;
    for (const auto& n : free_names(p)) c.next_name = std::max(c.next_name, suffix_number(n));
    spawn(c, p, 0);
    return c;
}

Process to_process(const Config& c) {
    std::vector<Process> parts;
    for (const auto& t : c.threads) {
        Process p = t.head;
        for (unsigned i = 0; i < t.bullets; ++i) p = bullet(p);
        if (t.replicated) p = repl(p);
        parts.push_back(p);
    }
    Process body = par_all(std::move(parts));
    const auto fn = free_names(body);
    std::vector<std::string> used;
    for (const auto& r : c.restricted)
        if (fn.contains(r)) used.push_back(r);
    return new_all(used, body);
}

std::string_view redex_rule_name(RedexKind k) {
    switch (k) {
        case RedexKind::Comm: return "COMM";
        case RedexKind::Broad: return "BROAD";
        case RedexKind::Then: return "THEN";
        case RedexKind::Else: return "ELSE";
    }
    return "?";
}

bool is_important(const Config& c, const Redex& r) {
    if (c.threads[r.initiator].bullets > 0) return true;
    for (auto i : r.receivers)
        if (c.threads[i].bullets > 0) return true;
    return false;
}

Enabled enabled_redexes(const Config& c, const EngineOptions& opts) {
    Enabled out;
    struct Group {
        std::vector<std::size_t> senders, broadcasters, receivers;
    };
    std::map<std::string, Group> groups;
    std::vector<Redex> matches;
    for (std::size_t i = 0; i < c.threads.size(); ++i) {
        const Thread& t = c.threads[i];
        if (const auto* m = t.head.as<Match>()) {
            Redex r{RedexKind::Then, i, {}, {}};
            try {
                auto d = decide(*m);
                if (!d) continue;
                r.kind = *d ? RedexKind::Then : RedexKind::Else;
            } catch (const TermError&) {
                // enabled; the fault surfaces when it fires
            }
            matches.push_back(r);
            continue;
        }
        const Action* a = head_action(t);
        auto key = channel_key(a->channel);
        if (!key) continue;  // blocked: base is not a name
        Group& g = groups[*key];
        switch (a->kind) {
            case Action::Kind::Send: g.senders.push_back(i); break;
            case Action::Kind::Broadcast: g.broadcasters.push_back(i); break;
            case Action::Kind::Recv: g.receivers.push_back(i); break;
        }
    }
    auto arity = [&](std::size_t i) { return head_action(c.threads[i])->arity(); };
    auto mismatch = [&](const std::string& key, std::size_t s, std::size_t r) {
        out.diagnostics.push_back("arity mismatch on " + key + ": " + std::to_string(arity(s)) + " sent, " +
                                  std::to_string(arity(r)) + " expected");
    };
    for (const auto& [key, g] : groups) {
        for (auto s : g.senders) {
            for (auto r : g.receivers) {
                if (arity(s) != arity(r)) {
                    mismatch(key, s, r);
                    continue;
                }
                out.redexes.push_back(Redex{RedexKind::Comm, s, {r}, key});
            }
        }
        for (auto b : g.broadcasters) {
            Redex red{RedexKind::Broad, b, {}, key};
            for (auto r : g.receivers) {
                if (arity(b) != arity(r)) {
                    mismatch(key, b, r);
                    continue;
                }
                red.receivers.push_back(r);
            }
            out.redexes.push_back(std::move(red));
        }
    }
    out.redexes.insert(out.redexes.end(), matches.begin(), matches.end());
    if (opts.admin_only)
        std::erase_if(out.redexes, [&](const Redex& r) { return is_important(c, r); });
    return out;
}

std::pair<Config, Step> apply_redex(const Config& c, const Redex& r) {
    Step step;
    step.rule = r.kind;
    step.channel = r.channel;
    const bool important = is_important(c, r);
    step.kind = important ? Step::Kind::Important : Step::Kind::Administrative;

    std::vector<std::size_t> parts{r.initiator};
    parts.insert(parts.end(), r.receivers.begin(), r.receivers.end());
    std::uint64_t depth = 0;
    for (auto i : parts) {
        const Thread& t = c.threads[i];
        depth = std::max(depth, t.depth);
        step.participants.push_back(t.id);
        step.bullets_consumed += t.bullets;
        if (t.replicated) step.bullets_unfolded += t.bullets + count_bullets(t.head);
    }
    if (important) ++depth;
    step.depth_after = depth;

    // continuations, in participant order
    std::vector<Process> conts;
    const Thread& init = c.threads[r.initiator];
    if (const auto* m = init.head.as<Match>()) {
        bool taken;
        try {
            auto d = decide(*m);
            taken = d.value_or(true);
        } catch (const TermError& e) {
            throw RuntimeFault(init.id, std::string("comparison fault: ") + e.what());
        }
        step.rule = taken ? RedexKind::Then : RedexKind::Else;
        conts.push_back(taken ? m->then_p : m->else_p);
        step.bullets_discarded += count_bullets(taken ? m->else_p : m->then_p);
    } else {
        const auto& sender = *init.head.as<Act>();
        std::vector<Term> values;
        for (const auto& t : sender.action.args) {
            try {
                values.push_back(eval_term(t));
            } catch (const TermError& e) {
                throw RuntimeFault(init.id, std::string("term fault on ") + r.channel + ": " + e.what());
            }
        }
        conts.push_back(sender.cont);
        for (auto i : r.receivers) {
            const auto& rc = *c.threads[i].head.as<Act>();
            Substitution s;
            for (std::size_t k = 0; k < rc.action.params.size(); ++k)
                if (rc.action.params[k]) s.vars[*rc.action.params[k]] = values[k];
            conts.push_back(subst(rc.cont, s));
        }
        if (r.kind == RedexKind::Broad) {
            const auto base = base_name(sender.action.channel);
            if (base && !c.restricted.contains(*base)) step.label = ":" + r.channel;
        }
    }

    Config next;
    next.restricted = c.restricted;
    next.next_name = c.next_name;
    next.next_thread = c.next_thread;
    std::vector<bool> drop(c.threads.size(), false);
    for (auto i : parts)
        if (!c.threads[i].replicated) drop[i] = true;
    next.threads.reserve(c.threads.size() + conts.size());
    for (std::size_t i = 0; i < c.threads.size(); ++i)
        if (!drop[i]) next.threads.push_back(c.threads[i]);
    for (const auto& k : conts) step.bullets_discarded += spawn(next, k, depth);
    return {std::move(next), std::move(step)};
}

std::size_t config_bullets(const Config& c) {
    std::size_t n = 0;
    for (const auto& t : c.threads) n += t.bullets + count_bullets(t.head);
    return n;
}

std::set<Barb> barbs(const Config& c) {
    std::set<Barb> out;
    for (const auto& t : c.threads) {
        const Action* a = head_action(t);
        if (!a) continue;
        auto base = base_name(a->channel);
        if (!base || c.restricted.contains(*base)) continue;
        auto key = channel_key(a->channel);
        if (!key) continue;
        out.insert(Barb{*key, a->kind != Action::Kind::Recv});
    }
    return out;
}

bool has_barb(const Config& c, const std::string& channel, bool out) {
    for (const auto& t : c.threads) {
        const Action* a = head_action(t);
        if (!a || (a->kind != Action::Kind::Recv) != out) continue;
        auto base = base_name(a->channel);
        if (!base || c.restricted.contains(*base)) continue;
        if (channel_key(a->channel) == channel) return true;
    }
    return false;
}

Config garbage_collect(const Config& c) {
    Config cur = c;
    for (bool changed = true; changed;) {
        changed = false;
        std::vector<std::set<std::string>> names(cur.threads.size());
        for (std::size_t i = 0; i < cur.threads.size(); ++i) names[i] = free_names(cur.threads[i].head);
        std::map<std::string, bool> collectable;  // restricted subject -> still collectable
        std::vector<std::optional<std::string>> subject(cur.threads.size());
        for (std::size_t i = 0; i < cur.threads.size(); ++i) {
            const Thread& t = cur.threads[i];
            const Action* a = head_action(t);
            if (!t.replicated || !a) continue;
            auto b = base_name(a->channel);
            if (b && cur.restricted.contains(*b)) {
                subject[i] = *b;
                collectable.emplace(*b, true);
            }
        }
        for (std::size_t i = 0; i < cur.threads.size(); ++i)
            for (auto& [b, ok] : collectable)
                if (ok && names[i].contains(b) && subject[i] != b) ok = false;
        std::vector<Thread> kept;
        for (std::size_t i = 0; i < cur.threads.size(); ++i) {
            if (subject[i] && collectable[*subject[i]]) {
                changed = true;
                continue;
            }
            kept.push_back(cur.threads[i]);
        }
        cur.threads = std::move(kept);
    }
    return cur;
}

std::string canonical_key(const Config& c) {
    const std::size_t n = c.threads.size();
    // restricted names in order of appearance within each thread
    std::vector<std::vector<std::string>> occurs(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::string text = render_thread(c.threads[i], {});
        for (std::size_t p = 0; p < text.size();) {
            const char ch = text[p];
            if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
                std::size_t q = p;
                while (q < text.size() && (std::isalnum(static_cast<unsigned char>(text[q])) || text[q] == '_' ||
                                           text[q] == '#' || text[q] == '~' || text[q] == '\''))
                    ++q;
                std::string id = text.substr(p, q - p);
                if (c.restricted.contains(id)) occurs[i].push_back(std::move(id));
                p = q;
            } else {
                ++p;
            }
        }
    }
    Substitution s;
    for (const auto& row : occurs)
        for (const auto& id : row) s.names[id] = "$" + template_of(id);

    std::vector<std::string> rendered(n);
    std::vector<std::size_t> order(n);
    for (int round = 0; round < 3; ++round) {
        for (std::size_t i = 0; i < n; ++i) rendered[i] = render_thread(c.threads[i], s);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return rendered[a] < rendered[b]; });
        Substitution next;
        std::size_t k = 0;
        for (auto i : order)
            for (const auto& id : occurs[i])
                if (!next.names.contains(id)) next.names[id] = "$" + std::to_string(k++);
        s = std::move(next);
    }
    for (std::size_t i = 0; i < n; ++i) rendered[i] = render_thread(c.threads[i], s);
    std::sort(rendered.begin(), rendered.end());
    std::string key;
    for (const auto& r : rendered) {
        key += r;
        key += '\n';
    }
    return key;
}

std::string pretty(const Config& c) {
    std::ostringstream os;
    os << "new {";
    bool first = true;
    for (const auto& r : c.restricted) {
        os << (first ? "" : ", ") << r;
        first = false;
    }
    os << "}\n";
    for (const auto& t : c.threads) os << "  [" << t.id << " d" << t.depth << "] " << render_thread(t, {}) << '\n';
    return os.str();
}

std::string_view status_name(Trace::Status s) {
    switch (s) {
        case Trace::Status::Quiescent: return "quiescent";
        case Trace::Status::StopBarb: return "stop-barb";
        case Trace::Status::Timeout: return "timeout";
        case Trace::Status::Faulted: return "faulted";
    }
    return "?";
}

Trace run(const Config& start, const SchedulerPolicy& policy, const RunOptions& opts) {
    Trace tr;
    Config cur = opts.gc ? garbage_collect(start) : start;
    std::mt19937_64 rng(policy.seed);
    for (const auto& t : cur.threads) tr.span = std::max(tr.span, t.depth);
    if (opts.observer) opts.observer(cur, nullptr);
    for (;;) {
        if (opts.stop_barb && has_barb(cur, *opts.stop_barb, true)) {
            tr.status = Trace::Status::StopBarb;
            break;
        }
        Enabled en = enabled_redexes(cur, opts.engine);
        if (opts.engine.strict && !en.diagnostics.empty()) {
            tr.diagnostics = std::move(en.diagnostics);
            tr.status = Trace::Status::Faulted;
            break;
        }
        if (en.redexes.empty()) {
            tr.status = Trace::Status::Quiescent;
            break;
        }
        if (tr.steps.size() >= opts.budget) {
            tr.status = Trace::Status::Timeout;
            break;
        }
        std::size_t pick = 0;
        if (policy.kind == SchedulerKind::SeededRandom) {
            pick = static_cast<std::size_t>(rng() % en.redexes.size());
        } else {
            auto best = participant_ids(cur, en.redexes[0]);
            for (std::size_t i = 1; i < en.redexes.size(); ++i) {
                auto ids = participant_ids(cur, en.redexes[i]);
                if (ids < best) {
                    best = std::move(ids);
                    pick = i;
                }
            }
        }
        try {
            auto [next, step] = apply_redex(cur, en.redexes[pick]);
            if (step.kind == Step::Kind::Important)
                ++tr.work;
            else
                ++tr.admin_steps;
            tr.span = std::max(tr.span, step.depth_after);
            tr.steps.push_back(std::move(step));
            cur = opts.gc ? garbage_collect(next) : std::move(next);
            if (opts.observer) opts.observer(cur, &tr.steps.back());
        } catch (const RuntimeFault& f) {
            tr.faults.push_back(Fault{f.thread(), f.what()});
            if (opts.engine.strict) {
                tr.status = Trace::Status::Faulted;
                break;
            }
            std::erase_if(cur.threads, [&](const Thread& t) { return t.id == f.thread(); });
        }
    }
    tr.final_barbs = barbs(cur);
    tr.final = std::move(cur);
    return tr;
}

ExploreResult explore(const Config& start, const ExploreOptions& opts) {
    ExploreResult res;
    std::unordered_set<std::pair<std::uint64_t, std::uint64_t>, KeyHash> visited;
    auto key_of = [](const Config& c) {
        const std::string k = canonical_key(c);
        return std::make_pair(static_cast<std::uint64_t>(std::hash<std::string>{}(k)), fnv1a(k));
    };
    std::deque<std::pair<Config, std::size_t>> queue;
    PatternCache cache;
    Config first = opts.gc ? garbage_collect(start) : start;
    visited.insert(key_of(first));
    queue.emplace_back(std::move(first), 0);
    while (!queue.empty()) {
        auto [cur, depth] = std::move(queue.front());
        queue.pop_front();
        if (opts.stop && opts.stop(cur)) {
            res.terminals.push_back(std::move(cur));
            continue;
        }
        Enabled en = enabled_redexes(cur, opts.engine);
        if (en.redexes.empty()) {
            res.terminals.push_back(std::move(cur));
            continue;
        }
        if (depth >= opts.depth_bound) {
            res.bound_hit = true;
            continue;
        }
        if (opts.reduce) {
            for (const auto& r : en.redexes) {
                if (!persistent(cur, r, cache)) continue;
                try {
                    apply_redex(cur, r);
                } catch (const RuntimeFault&) {
                    continue;
                }
                en.redexes = {r};
                break;
            }
        }
        for (const auto& r : en.redexes) {
            Config next;
            try {
                next = apply_redex(cur, r).first;
            } catch (const RuntimeFault&) {
                ++res.faults;
                continue;
            }
            if (opts.gc) next = garbage_collect(next);
            if (!visited.insert(key_of(next)).second) continue;
            if (visited.size() > opts.state_bound) {
                res.bound_hit = true;
                res.states = visited.size();
                return res;
            }
            queue.emplace_back(std::move(next), depth + 1);
        }
    }
    res.states = visited.size();
    return res;
}

bool is_persistent(const Config& c, const Redex& r) {
    PatternCache cache;
    return persistent(c, r, cache);
}

}  // namespace bpi::epi
