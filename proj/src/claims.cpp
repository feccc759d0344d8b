#include "graf/claims.hpp"

#include <fstream>
#include <regex>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "graf/text.hpp"

namespace graf {

namespace {

constexpr std::string_view kPromptEn = R"PROMPT(Extract all entities and relationships between entities from the legal text based on the example. In the end, add STOP.
You will answer with triplets of the form: (entity;relation;entity). The triplets are separated on lines. Each triplet relationship will be entered separately.
Entities can be institutions, organizations, persons, functions, documents, courts and others.

Text:
(1) An assets investigation commission, hereinafter referred to as the investigation commission, shall operate in addition to each court of appeal, consisting of:
a) 2 judges from the court of appeal, designated by its president, one of whom shall act as president,
b) a prosecutor from the prosecutor's office operating under the court of appeal, designated by the chief prosecutor of this prosecutor's office.
(2) The president and members of the investigation commission shall be designated for a period of 3 years. During the same period and by the same persons, 3 alternates will also be appointed, who will replace the holders in the event that they, for legal reasons, are unable to participate in the work of the investigation commission.
(3) The investigation commission has a secretary, appointed by the president of the court of appeal from among the clerks of this court.

Entity;Relationship;Entity:
(court of appeal;shall operated in addition to;assets investigation commission)
(assets investigation commission;referred to as;investigation commission)
(investigation commission;consisting of;2 judges)
(2 judges;designated by;president of the court of appeal)
(investigation commission;consisting of;prosecutor)
(prosecutor;from;prosecutor's office operating under the court of appeal)
(prosecutor;designated by;chief prosecutor)
(president of the investigation commission;designated for a period of;3 years)
(members of the investigation commission;designated for a period of;3 years)
(3 alternates;appointed by;the president of the court of appeal)
(3 alternates;appointed by;the chief prosecutor)
(3 alternates;designated for a period of;3 years)
(3 alternates;will replace the holders if they cannot take part in the work of the investigation commission on;the heads)
(investigation commission;has;a secretary)
(a secretary;appointed by among the clerks of;the president of the court of appeal)
STOP

Text:
)PROMPT";

constexpr std::string_view kPromptRo = R"PROMPT(Extrage toate entitățile și toate relațiile dintre entități din textul legal pe baza exemplului. La final adaugă STOP.
Tu vei răspunde cu triplete de forma: (entitate;relație;entitate). Tripletele sunt separate pe linii. Fiecare relație triplet se va trece separat.
Entitățile pot fi instituții, organizații, persoane, funcții, documente, instanțe și altele.

Text:
(1) Pe lângă fiecare curte de apel va funcţiona o comisie de cercetare a averilor, denumită în continuare comisie de cercetare, formată din:
a) 2 judecători de la curtea de apel, desemnaţi de preşedintele acesteia, dintre care unul în calitate de preşedinte,
b) un procuror de la parchetul care funcţionează pe lângă curtea de apel, desemnat de prim-procurorul acestui parchet.
(2) Preşedintele şi membrii comisiei de cercetare sunt desemnaţi pe o perioadă de 3 ani. Pe aceeaşi perioadă şi de către aceleaşi persoane vor fi desemnaţi şi 3 supleanţi, care îi vor înlocui pe titulari în cazul în care aceştia, din motive legale, nu vor putea lua parte la lucrările comisiei de cercetare.
(3) Comisia de cercetare are un secretar, desemnat de preşedintele curţii de apel dintre grefierii acestei instanţe.

Entitate;Relație;Entitate:
(curte de apel;funcționează pe lângă;comisie de cercetare a averilor)
(comisie de cercetare a averilor;denumită;comisie de cercetare)
(comisie de cercetare;formată din;2 judecători)
(2 judecători;desemnați de;președinte curte de apel)
(comisie de cercetare;formată din;procuror)
(procuror;de la;parchetul care funcționează pe lângă curtea de apel)
(procuror;desemnat de;prim-procuror)
(președinte comisie de cercetare;desemnat pe o perioadă de;3 ani)
(membrii comisiei de cercetare;desemnat pe o perioadă de;3 ani)
(3 supleanți;desemnați de;președinte curte de apel)
(3 supleanți;desemnați de;prim-procuror)
(3 supleanți;desemnați pe o perioadă de;3 ani)
(3 supleanți;îi vor înlocui dacă nu vor putea lua parte la lucrările comisiei de cercetare pe;titulari)
(comisie de cercetare;are;un secretar)
(un secretar;desemnat dintre grefieri de;președinte curte de apel)
STOP

Text:
)PROMPT";

constexpr std::string_view kCueEn = "\n\nEntity;Relationship;Entity:";
constexpr std::string_view kCueRo = "\n\nEntitate;Relație;Entitate:";

}  // namespace

PromptLanguage parse_prompt_language(std::string_view s) {
    if (s == "en") return PromptLanguage::en;
    if (s == "ro") return PromptLanguage::ro;
    throw std::invalid_argument("unknown prompt language '" + std::string(s) + "' (expected en or ro)");
}

std::string render_prompt(std::string_view document, PromptLanguage lang) {
    const std::string_view head = lang == PromptLanguage::ro ? kPromptRo : kPromptEn;
    const std::string_view cue = lang == PromptLanguage::ro ? kCueRo : kCueEn;
    std::string out;
    out.reserve(head.size() + document.size() + cue.size());
    out += head;
    out += document;
    out += cue;
    return out;
}

std::string_view prompt_document(std::string_view prompt) {
    for (auto [head, cue] : {std::pair{kPromptEn, kCueEn}, std::pair{kPromptRo, kCueRo}}) {
        if (prompt.size() >= head.size() + cue.size() && prompt.starts_with(head) && prompt.ends_with(cue)) {
            return prompt.substr(head.size(), prompt.size() - head.size() - cue.size());
        }
    }
    return prompt;
}

std::string prompt_hash(std::string_view prompt) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : prompt) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

namespace {

std::vector<Triplet> embedded_triplets(std::string_view text) {
    static const std::regex pattern(R"(\(([^;()\n]+);([^;()\n]+);([^;()\n]+)\))");
    std::vector<Triplet> out;
    const std::string s(text);
    for (auto it = std::sregex_iterator(s.begin(), s.end(), pattern); it != std::sregex_iterator(); ++it) {
        Triplet t{std::string(text::trim((*it)[1].str())), std::string(text::trim((*it)[2].str())),
                  std::string(text::trim((*it)[3].str()))};
        if (!t.head.empty() && !t.relation.empty() && !t.tail.empty()) out.push_back(std::move(t));
    }
    return out;
}

}  // namespace

std::string PatternClient::complete(const std::string& prompt) const {
    std::string out;
    for (const auto& t : embedded_triplets(prompt_document(prompt))) {
        out += format_triplet(t);
        out += '\n';
    }
    out += "STOP\n";
    return out;
}

FixtureClient::FixtureClient(std::filesystem::path dir) : dir_(std::move(dir)) {
    if (!std::filesystem::is_directory(dir_)) throw ClientError("fixture directory " + dir_.string() + " does not exist");
}

std::string FixtureClient::complete(const std::string& prompt) const {
    const auto path = dir_ / (prompt_hash(prompt) + ".txt");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ClientError("no canned completion for prompt hash " + prompt_hash(prompt) + " (" + path.string() + ")");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

HttpClient::HttpClient(std::string url, std::string model, std::string bearer_token, int timeout_seconds)
    : model_(std::move(model)), token_(std::move(bearer_token)), timeout_(timeout_seconds) {
    constexpr std::string_view scheme = "http://";
    if (!std::string_view(url).starts_with(scheme)) {
        throw ClientError("completion endpoint must be an http:// URL, got '" + url + "'");
    }
    const auto slash = url.find('/', scheme.size());
    origin_ = url.substr(0, slash);
    path_ = slash == std::string::npos ? "/" : url.substr(slash);
    if (origin_.size() == scheme.size()) throw ClientError("completion endpoint has no host: '" + url + "'");
}

std::string HttpClient::complete(const std::string& prompt) const {
    httplib::Client cli(origin_);
    cli.set_connection_timeout(timeout_, 0);
    cli.set_read_timeout(timeout_, 0);
    httplib::Headers headers;
    if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
    const nlohmann::json body{{"model", model_}, {"prompt", prompt}, {"temperature", 0}, {"max_tokens", 1024}};
    auto res = cli.Post(path_, headers, body.dump(), "application/json");
    if (!res) {
        throw ClientError("POST " + origin_ + path_ + " failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw ClientError("POST " + origin_ + path_ + " returned HTTP " + std::to_string(res->status) + ": " +
                          res->body.substr(0, 200));
    }
    try {
        const auto reply = nlohmann::json::parse(res->body);
        if (reply.contains("choices") && !reply["choices"].empty()) {
            const auto& c = reply["choices"][0];
            if (c.contains("text")) return c["text"].get<std::string>();
            if (c.contains("message")) return c["message"].at("content").get<std::string>();
        }
        if (reply.contains("response")) return reply["response"].get<std::string>();
        if (reply.contains("completion")) return reply["completion"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ClientError("unreadable reply from " + origin_ + path_ + ": " + e.what());
    }
    throw ClientError("reply from " + origin_ + path_ + " carries no completion text");
}

ExtractionResult extract_claims(std::string_view question, std::string_view choice, const CompletionClient& client,
                                PromptLanguage lang) {
    std::string document(question);
    document += ' ';
    document += choice;
    const std::string prompt = render_prompt(document, lang);

    ExtractionResult result;
    TripletBlock block;
    for (int attempt = 0; attempt < 2; ++attempt) {
        ++result.attempts;
        block = parse_triplet_block(client.complete(prompt));
        result.skipped_lines += block.skipped;
        if (!block.triplets.empty()) break;
    }
    result.graph = build_graph(block.triplets);
    result.empty_warning = result.graph.edge_count() == 0;
    return result;
}

ClaimGraph stub_extract(std::string_view text) { return build_graph(embedded_triplets(text)); }

ExtractionResult StubClaimExtractor::extract(std::string_view question, std::string_view choice) const {
    std::string document(question);
    document += ' ';
    document += choice;
    ExtractionResult result;
    result.graph = stub_extract(document);
    result.attempts = 1;
    result.empty_warning = result.graph.edge_count() == 0;
    return result;
}

}  // namespace graf
