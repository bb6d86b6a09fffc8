#pragma once

#include <iosfwd>
#include <string>

#include "uicrop/srdl.hpp"

namespace uicrop {

// JSON-lines agent protocol.
// Request:  {"op":"enumerate"|"ground"|"refer", "image":"<path>",
//            "description"?: str, "bbox"?: [x1,y1,x2,y2]}
// Response: {"ok":true, "descriptions"?:[...], "bbox"?:[...],
//            "description"?:str}  or  {"ok":false, "error":str}

// Serves an in-process agent over the protocol until EOF. Malformed
// requests produce {"ok":false,...} responses; the loop keeps serving.
void serve_agent(AgentInterface& agent, std::istream& in, std::ostream& out);

// Client side: spawns `command` through /bin/sh and speaks the protocol
// over its stdio. {"ok":false} responses become AgentError (the element is
// rejected, the run continues); malformed responses or a dead pipe raise
// ProtocolError.
class CmdAgent : public AgentInterface {
public:
    explicit CmdAgent(const std::string& command);
    ~CmdAgent() override;

    CmdAgent(const CmdAgent&) = delete;
    CmdAgent& operator=(const CmdAgent&) = delete;

    std::vector<ElementDescription> enumerate(const std::string& image_id) override;
    BBox ground(const std::string& image_id, const std::string& description) override;
    ElementDescription refer(const std::string& image_id, const BBox& box) override;

private:
    std::string roundtrip(const std::string& request_line);

    int pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
};

}  // namespace uicrop
