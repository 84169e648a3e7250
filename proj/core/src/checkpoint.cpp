#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "ein/errors.hpp"
#include "ein/neural.hpp"

namespace ein {

namespace {

constexpr char kMagic[4] = {'E', 'I', 'N', '1'};

nlohmann::json config_to_json(const EinConfig& c) {
    return {{"lstm_units", c.lstm_units},
            {"dense_a_units", c.dense_a_units},
            {"dense_b_units", c.dense_b_units},
            {"batch_size", c.batch_size},
            {"hidden_activation", to_string(c.hidden_activation)},
            {"optimizer", to_string(c.optimizer)},
            {"learning_rate", c.learning_rate},
            {"drop_c", c.drop_c},
            {"drop_d", c.drop_d},
            {"max_sequence", c.max_sequence},
            {"output_mode", to_string(c.output_mode)},
            {"remove_stop_words", c.remove_stop_words},
            {"trainable_embeddings", c.trainable_embeddings},
            {"seed", c.seed},
            {"early_stop_patience", c.early_stop_patience},
            {"max_epochs", c.max_epochs}};
}

EinConfig config_from_json(const nlohmann::json& j) {
    EinConfig c;
    c.lstm_units = j.at("lstm_units");
    c.dense_a_units = j.at("dense_a_units");
    c.dense_b_units = j.at("dense_b_units");
    c.batch_size = j.at("batch_size");
    c.hidden_activation = activation_from_string(j.at("hidden_activation"));
    c.optimizer = optimizer_from_string(j.at("optimizer"));
    c.learning_rate = j.at("learning_rate");
    c.drop_c = j.at("drop_c");
    c.drop_d = j.at("drop_d");
    c.max_sequence = j.at("max_sequence");
    c.output_mode = j.at("output_mode") == "sigmoid_binary" ? OutputMode::sigmoid_binary
                                                            : OutputMode::softmax_multiclass;
    c.remove_stop_words = j.at("remove_stop_words");
    c.trainable_embeddings = j.at("trainable_embeddings");
    c.seed = j.at("seed");
    c.early_stop_patience = j.at("early_stop_patience");
    c.max_epochs = j.at("max_epochs");
    return c;
}

// Every layer needed for inference, frozen embeddings included.
std::vector<std::pair<std::string, const Eigen::MatrixXd*>> checkpoint_layers(
    const EinModel& m) {
    std::vector<std::pair<std::string, const Eigen::MatrixXd*>> out;
    out.emplace_back("embedding", &m.embedding);
    out.emplace_back("oov", &m.oov);
    out.emplace_back("lstm_wx", &m.lstm_wx);
    out.emplace_back("lstm_wh", &m.lstm_wh);
    out.emplace_back("lstm_b", &m.lstm_b);
    out.emplace_back("att_w", &m.att_w);
    out.emplace_back("att_b", &m.att_b);
    if (m.config().dense_a_units > 0) {
        out.emplace_back("dense_a_w", &m.dense_a_w);
        out.emplace_back("dense_a_b", &m.dense_a_b);
    }
    out.emplace_back("dense_b_w", &m.dense_b_w);
    out.emplace_back("dense_b_b", &m.dense_b_b);
    out.emplace_back("out_w", &m.out_w);
    out.emplace_back("out_b", &m.out_b);
    return out;
}

}  // namespace

void save_checkpoint(const EinModel& model, const std::string& path) {
    auto params = checkpoint_layers(model);

    nlohmann::json header;
    header["config"] = config_to_json(model.config());
    header["vocab"] = model.vocabulary();
    header["classes"] = model.class_names();
    header["emotion_dim"] = model.emotion_dim();
    header["embed_dim"] = model.embed_dim();
    header["layers"] = nlohmann::json::array();
    std::uint64_t offset = 0;
    for (const auto& [name, p] : params) {
        header["layers"].push_back({{"name", name},
                                    {"rows", p->rows()},
                                    {"cols", p->cols()},
                                    {"offset", offset}});
        offset += std::uint64_t(p->size()) * sizeof(float);
    }
    std::string header_str = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open checkpoint for writing: " + path);
    out.write(kMagic, 4);
    auto len = static_cast<std::uint32_t>(header_str.size());
    unsigned char lenb[4] = {static_cast<unsigned char>(len & 0xff),
                             static_cast<unsigned char>((len >> 8) & 0xff),
                             static_cast<unsigned char>((len >> 16) & 0xff),
                             static_cast<unsigned char>((len >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(lenb), 4);
    out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));

    // Payload: column-major per layer, little-endian float32.
    for (const auto& [name, p] : params) {
        for (Eigen::Index i = 0; i < p->size(); ++i) {
            float f = static_cast<float>((*p)(i));
            std::uint32_t bits;
            std::memcpy(&bits, &f, 4);
            unsigned char b[4] = {static_cast<unsigned char>(bits & 0xff),
                                  static_cast<unsigned char>((bits >> 8) & 0xff),
                                  static_cast<unsigned char>((bits >> 16) & 0xff),
                                  static_cast<unsigned char>((bits >> 24) & 0xff)};
            out.write(reinterpret_cast<const char*>(b), 4);
        }
    }
    if (!out) throw ParseError("checkpoint write failed: " + path);
}

EinModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open checkpoint: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw ParseError(path + ": not an EIN1 checkpoint");
    unsigned char lenb[4];
    in.read(reinterpret_cast<char*>(lenb), 4);
    std::uint32_t len = std::uint32_t(lenb[0]) | (std::uint32_t(lenb[1]) << 8) |
                        (std::uint32_t(lenb[2]) << 16) | (std::uint32_t(lenb[3]) << 24);
    std::string header_str(len, '\0');
    in.read(header_str.data(), len);
    if (!in) throw ParseError(path + ": truncated checkpoint header");
    nlohmann::json header = nlohmann::json::parse(header_str);

    EinModel model;
    model.set_metadata(config_from_json(header.at("config")),
                       header.at("vocab").get<std::vector<std::string>>(),
                       header.at("classes").get<std::vector<std::string>>(),
                       header.at("emotion_dim"), header.at("embed_dim"));

    std::map<std::string, Eigen::MatrixXd*> slots;
    EinModel& m = model;
    slots["embedding"] = &m.embedding;
    slots["oov"] = &m.oov;
    slots["lstm_wx"] = &m.lstm_wx;
    slots["lstm_wh"] = &m.lstm_wh;
    slots["lstm_b"] = &m.lstm_b;
    slots["att_w"] = &m.att_w;
    slots["att_b"] = &m.att_b;
    slots["dense_a_w"] = &m.dense_a_w;
    slots["dense_a_b"] = &m.dense_a_b;
    slots["dense_b_w"] = &m.dense_b_w;
    slots["dense_b_b"] = &m.dense_b_b;
    slots["out_w"] = &m.out_w;
    slots["out_b"] = &m.out_b;
    if (model.config().dense_a_units == 0) {
        m.dense_a_w.resize(0, model.emotion_dim());
        m.dense_a_b.resize(0, 1);
    }

    for (const auto& layer : header.at("layers")) {
        std::string name = layer.at("name");
        auto it = slots.find(name);
        if (it == slots.end()) throw ParseError(path + ": unknown layer '" + name + "'");
        Eigen::MatrixXd& p = *it->second;
        p.resize(layer.at("rows").get<Eigen::Index>(), layer.at("cols").get<Eigen::Index>());
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            unsigned char b[4];
            in.read(reinterpret_cast<char*>(b), 4);
            if (!in) throw ParseError(path + ": truncated checkpoint payload in '" + name + "'");
            std::uint32_t bits = std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) |
                                 (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
            float f;
            std::memcpy(&f, &bits, 4);
            p(i) = static_cast<double>(f);
        }
    }
    return model;
}

}  // namespace ein
