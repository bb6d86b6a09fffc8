#include "uicrop/agent_wire.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <istream>
#include <ostream>

#include "json.hpp"

namespace uicrop {

using nlohmann::json;

namespace {

json bbox_to_json(const BBox& b) { return json::array({b.x1, b.y1, b.x2, b.y2}); }

BBox bbox_from_json(const json& j) {
    if (!j.is_array() || j.size() != 4) throw ProtocolError("bbox must be a 4-element array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

}  // namespace

void serve_agent(AgentInterface& agent, std::istream& in, std::ostream& out) {
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json reply;
        try {
            const json req = json::parse(line);
            const std::string op = req.at("op").get<std::string>();
            const std::string image = req.value("image", std::string());
            if (op == "enumerate") {
                json descs = json::array();
                for (const ElementDescription& d : agent.enumerate(image)) {
                    descs.push_back(d.text);
                }
                reply = {{"ok", true}, {"descriptions", descs}};
            } else if (op == "ground") {
                const BBox b = agent.ground(image, req.at("description").get<std::string>());
                reply = {{"ok", true}, {"bbox", bbox_to_json(b)}};
            } else if (op == "refer") {
                const ElementDescription d = agent.refer(image, bbox_from_json(req.at("bbox")));
                reply = {{"ok", true}, {"description", d.text}};
            } else {
                reply = {{"ok", false}, {"error", "unknown op '" + op + "'"}};
            }
        } catch (const std::exception& e) {
            reply = {{"ok", false}, {"error", e.what()}};
        }
        out << reply.dump() << "\n";
        out.flush();
    }
}

// ---------------------------------------------------------------------------
// CmdAgent

CmdAgent::CmdAgent(const std::string& command) {
    int to_pipe[2];
    int from_pipe[2];
    if (pipe(to_pipe) != 0 || pipe(from_pipe) != 0) {
        throw ProtocolError("failed to create agent pipes");
    }
    const pid_t pid = fork();
    if (pid < 0) throw ProtocolError("failed to fork agent process");
    if (pid == 0) {
        dup2(to_pipe[0], STDIN_FILENO);
        dup2(from_pipe[1], STDOUT_FILENO);
        close(to_pipe[0]);
        close(to_pipe[1]);
        close(from_pipe[0]);
        close(from_pipe[1]);
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(to_pipe[0]);
    close(from_pipe[1]);
    pid_ = pid;
    to_child_ = to_pipe[1];
    from_child_ = from_pipe[0];
}

CmdAgent::~CmdAgent() {
    if (to_child_ >= 0) close(to_child_);
    if (from_child_ >= 0) close(from_child_);
    if (pid_ > 0) {
        int status = 0;
        waitpid(pid_, &status, 0);
    }
}

std::string CmdAgent::roundtrip(const std::string& request_line) {
    const std::string payload = request_line + "\n";
    size_t written = 0;
    while (written < payload.size()) {
        const ssize_t n = write(to_child_, payload.data() + written, payload.size() - written);
        if (n <= 0) throw ProtocolError("agent pipe closed while writing request");
        written += static_cast<size_t>(n);
    }

    for (;;) {
        const size_t nl = buffer_.find('\n');
        if (nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return line;
        }
        char chunk[4096];
        const ssize_t n = read(from_child_, chunk, sizeof(chunk));
        if (n <= 0) throw ProtocolError("agent pipe closed before a response arrived");
        buffer_.append(chunk, static_cast<size_t>(n));
    }
}

namespace {

json parse_reply(const std::string& line) {
    json reply;
    try {
        reply = json::parse(line);
    } catch (const json::exception&) {
        throw ProtocolError("agent response is not valid JSON: " + line);
    }
    if (!reply.is_object() || !reply.contains("ok") || !reply["ok"].is_boolean()) {
        throw ProtocolError("agent response lacks the 'ok' field: " + line);
    }
    if (!reply["ok"].get<bool>()) {
        throw AgentError(reply.value("error", std::string("agent call failed")));
    }
    return reply;
}

}  // namespace

std::vector<ElementDescription> CmdAgent::enumerate(const std::string& image_id) {
    const json req = {{"op", "enumerate"}, {"image", image_id}};
    const json reply = parse_reply(roundtrip(req.dump()));
    if (!reply.contains("descriptions") || !reply["descriptions"].is_array()) {
        throw ProtocolError("enumerate response lacks 'descriptions'");
    }
    std::vector<ElementDescription> out;
    for (const auto& d : reply["descriptions"]) {
        if (!d.is_string()) throw ProtocolError("descriptions must be strings");
        ElementDescription desc;
        desc.text = d.get<std::string>();
        desc.kind = DescKind::basic;
        desc.origin.source = Provenance::Source::enumeration;
        out.push_back(std::move(desc));
    }
    return out;
}

BBox CmdAgent::ground(const std::string& image_id, const std::string& description) {
    const json req = {{"op", "ground"}, {"image", image_id}, {"description", description}};
    const json reply = parse_reply(roundtrip(req.dump()));
    if (!reply.contains("bbox")) throw ProtocolError("ground response lacks 'bbox'");
    return bbox_from_json(reply["bbox"]);
}

ElementDescription CmdAgent::refer(const std::string& image_id, const BBox& box) {
    const json req = {{"op", "refer"}, {"image", image_id}, {"bbox", bbox_to_json(box)}};
    const json reply = parse_reply(roundtrip(req.dump()));
    if (!reply.contains("description") || !reply["description"].is_string()) {
        throw ProtocolError("refer response lacks 'description'");
    }
    ElementDescription d;
    d.text = reply["description"].get<std::string>();
    d.kind = DescKind::referred;
    d.origin.source = Provenance::Source::referring;
    return d;
}

}  // namespace uicrop
