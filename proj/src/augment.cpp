#include "topicpipe/augment.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "topicpipe/errors.hpp"
#include "topicpipe/util.hpp"

namespace topicpipe::augment {

using json = nlohmann::ordered_json;

const char* const kDefaultInstruction =
    "What type of actor is the primary actor in this headline? Briefly describe the primary "
    "actor. If the headline doesn't reference an actor, say so. You don't need to include the "
    "headline in your response.";

PromptTemplate make_prompt_template(std::string instruction, std::string placeholder) {
    PromptTemplate tpl;
    tpl.template_id =
        "tpl-" + util::hex_digest(instruction + '\x1f' + placeholder);
    tpl.instruction = std::move(instruction);
    tpl.placeholder = std::move(placeholder);
    return tpl;
}

PromptTemplate default_prompt_template() {
    return make_prompt_template(std::string(kDefaultInstruction) + "\n\nHeadline: {headline}");
}

std::string render_prompt(const PromptTemplate& tpl, const corpus::Document& doc) {
    if (doc.text.empty()) throw ValidationError("render_prompt: document text is empty");
    const std::size_t pos = tpl.instruction.find(tpl.placeholder);
    if (pos == std::string::npos) {
        throw ValidationError("render_prompt: placeholder \"" + tpl.placeholder +
                              "\" missing from template " + tpl.template_id);
    }
    std::string out = tpl.instruction;
    out.replace(pos, tpl.placeholder.size(), doc.text);
    return out;
}

bool apply_exclusion_rule(std::string_view text, const ExclusionRule& rule) {
    for (const std::string& pattern : rule.patterns) {
        if (rule.case_sensitive ? text.find(pattern) != std::string_view::npos
                                : util::icontains(text, pattern)) {
            return true;
        }
    }
    return false;
}

std::string prompt_hash(const std::string& model_id, const std::string& template_id,
                        const std::string& doc_text) {
    return util::hex_digest(model_id + '\x1f' + template_id + '\x1f' + doc_text);
}

namespace {

json augmentation_to_json(const Augmentation& a) {
    json obj;
    obj["doc_id"] = a.doc_id;
    obj["prompt_hash"] = a.prompt_hash;
    obj["response_text"] = a.response_text;
    obj["model_id"] = a.model_id;
    obj["template_id"] = a.template_id;
    obj["created_at"] = a.created_at;
    obj["excluded"] = a.excluded;
    return obj;
}

Augmentation augmentation_from_json(const json& obj) {
    Augmentation a;
    a.doc_id = obj.at("doc_id").get<std::string>();
    a.prompt_hash = obj.at("prompt_hash").get<std::string>();
    a.response_text = obj.at("response_text").get<std::string>();
    a.model_id = obj.at("model_id").get<std::string>();
    a.template_id = obj.at("template_id").get<std::string>();
    a.created_at = obj.at("created_at").get<std::string>();
    a.excluded = obj.at("excluded").get<bool>();
    return a;
}

}  // namespace

AugmentationStore::AugmentationStore(std::string path) : path_(std::move(path)) {
    if (path_.empty()) return;
    std::ifstream in(path_);
    if (!in) return;  // created on first write
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (util::trim(line).empty()) continue;
        json obj = json::parse(line, nullptr, false);
        if (obj.is_discarded()) {
            throw ValidationError(path_ + ":" + std::to_string(line_no) +
                                  ": invalid augmentation record");
        }
        Augmentation a = augmentation_from_json(obj);
        auto key = std::make_pair(a.doc_id, a.prompt_hash);
        auto it = index_.find(key);
        if (it != index_.end()) {
            records_[it->second] = std::move(a);  // last write wins
        } else {
            index_[key] = records_.size();
            latest_by_doc_[key.first] = records_.size();
            records_.push_back(std::move(a));
        }
    }
}

std::optional<Augmentation> AugmentationStore::find(const std::string& doc_id,
                                                    const std::string& prompt_hash) const {
    std::lock_guard lock(mutex_);
    auto it = index_.find({doc_id, prompt_hash});
    if (it == index_.end()) return std::nullopt;
    return records_[it->second];
}

std::optional<Augmentation> AugmentationStore::find_latest(const std::string& doc_id) const {
    std::lock_guard lock(mutex_);
    auto it = latest_by_doc_.find(doc_id);
    if (it == latest_by_doc_.end()) return std::nullopt;
    return records_[it->second];
}

void AugmentationStore::upsert(const Augmentation& augmentation) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(augmentation.doc_id, augmentation.prompt_hash);
    auto it = index_.find(key);
    if (it != index_.end()) {
        if (records_[it->second] == augmentation) return;  // no-op, keep the file stable
        records_[it->second] = augmentation;
        latest_by_doc_[key.first] = it->second;
    } else {
        index_[key] = records_.size();
        latest_by_doc_[key.first] = records_.size();
        records_.push_back(augmentation);
    }
    if (!path_.empty()) {
        std::ofstream out(path_, std::ios::app);
        if (!out) throw ValidationError("cannot append to augmentation store: " + path_);
        out << augmentation_to_json(augmentation).dump() << '\n';
    }
}

std::size_t AugmentationStore::size() const {
    std::lock_guard lock(mutex_);
    return records_.size();
}

std::vector<Augmentation> AugmentationStore::all() const {
    std::lock_guard lock(mutex_);
    return records_;
}

std::string AugmentationStore::content_digest() const {
    std::lock_guard lock(mutex_);
    std::vector<std::string> lines;
    lines.reserve(records_.size());
    for (const Augmentation& a : records_) lines.push_back(augmentation_to_json(a).dump());
    std::sort(lines.begin(), lines.end());
    uint64_t h = util::kFnvOffsetBasis;
    for (const std::string& l : lines) {
        h = util::fnv1a64(l, h);
        h = util::fnv1a64("\n", h);
    }
    return util::to_hex(h);
}

AugmentResult augment_corpus(const corpus::Corpus& corpus, const PromptTemplate& tpl,
                             LLMClient& client, AugmentationStore& store,
                             const AugmentOptions& options) {
    if (corpus.documents.empty()) throw ValidationError("augment_corpus: corpus is empty");
    if (options.max_in_flight < 1) {
        throw ValidationError("augment_corpus: max_in_flight must be >= 1");
    }
    if (tpl.instruction.find(tpl.placeholder) == std::string::npos) {
        throw ValidationError("augment_corpus: placeholder \"" + tpl.placeholder +
                              "\" missing from template " + tpl.template_id);
    }

    const std::size_t n = corpus.documents.size();
    AugmentResult result;
    std::vector<std::optional<Augmentation>> slots(n);
    std::vector<std::optional<AugmentFailure>> failures(n);
    std::vector<std::size_t> pending;

    // Warm entries bypass the client; the excluded flag is refreshed under
    // this run's rule and corrected records are re-persisted.
    for (std::size_t i = 0; i < n; ++i) {
        const corpus::Document& doc = corpus.documents[i];
        const std::string hash = prompt_hash(client.model_id(), tpl.template_id, doc.text);
        if (auto hit = store.find(doc.id, hash)) {
            ++result.cache_hits;
            hit->excluded = apply_exclusion_rule(hit->response_text, options.rule);
            store.upsert(*hit);  // no-op unless the rule changed
            slots[i] = std::move(*hit);
        } else {
            pending.push_back(i);
        }
    }

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> calls{0};
    std::atomic<bool> abort{false};
    std::exception_ptr abort_error;
    std::mutex abort_mutex;

    auto worker = [&] {
        for (;;) {
            if (abort.load()) return;
            const std::size_t slot = next.fetch_add(1);
            if (slot >= pending.size()) return;
            const std::size_t i = pending[slot];
            const corpus::Document& doc = corpus.documents[i];
            try {
                const std::string prompt = render_prompt(tpl, doc);
                calls.fetch_add(1);
                const std::string response = client.complete(prompt, options.decoding);
                Augmentation a;
                a.doc_id = doc.id;
                a.response_text = response;
                a.model_id = client.model_id();
                a.template_id = tpl.template_id;
                a.prompt_hash = prompt_hash(client.model_id(), tpl.template_id, doc.text);
                a.created_at = util::iso8601_utc_now();
                a.excluded = apply_exclusion_rule(response, options.rule);
                store.upsert(a);
                slots[i] = std::move(a);
            } catch (const ClientError& e) {
                if (e.aborts_run()) {
                    std::lock_guard lock(abort_mutex);
                    if (!abort_error) abort_error = std::current_exception();
                    abort.store(true);
                    return;
                }
                failures[i] = AugmentFailure{doc.id, e.what()};
            } catch (const std::exception& e) {
                failures[i] = AugmentFailure{doc.id, e.what()};
            }
        }
    };

    const std::size_t workers = std::min(options.max_in_flight, pending.size());
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(worker);
        for (std::thread& t : threads) t.join();
    }

    result.client_calls = calls.load();
    if (abort_error) std::rethrow_exception(abort_error);

    for (std::size_t i = 0; i < n; ++i) {
        if (slots[i]) {
            result.augmentations.push_back(std::move(*slots[i]));
        } else if (failures[i]) {
            result.failures.push_back(std::move(*failures[i]));
        }
    }
    return result;
}

}  // namespace topicpipe::augment
