#include "chatbot/neural_net.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "chatbot/random.hpp"
#include "json.hpp"

namespace chatbot {

void MlpConfig::validate() const {
  for (int s : layer_sizes) {
    if (s < 1) throw InvalidConfig("every layer size must be at least 1");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw InvalidConfig("learning_rate must be positive");
  if (!(l2_lambda >= 0.0) || !std::isfinite(l2_lambda)) throw InvalidConfig("l2_lambda must be non-negative");
  if (max_epochs < 1) throw InvalidConfig("max_epochs must be positive");
  if (patience < 1) throw InvalidConfig("patience must be positive");
  if (batch_size < 1) throw InvalidConfig("batch_size must be positive");
}

Mlp init_mlp(const MlpConfig& config) {
  config.validate();
  Mlp mlp;
  mlp.config = config;
  mlp.network = zero_network<double>(config.layer_sizes);
  Rng rng(config.seed);
  for (int k = 0; k < 3; ++k) {
    const double fan_in = config.layer_sizes[static_cast<std::size_t>(k)];
    const double fan_out = config.layer_sizes[static_cast<std::size_t>(k + 1)];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    auto& w = mlp.network.weights[static_cast<std::size_t>(k)];
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = rng.uniform(-bound, bound);
    }
  }
  return mlp;
}

namespace {

void check_input(const Mlp& mlp, Eigen::Index cols) {
  if (cols != mlp.network.input_size()) {
    throw DimensionMismatch("expected " + std::to_string(mlp.network.input_size()) + " features, got " +
                            std::to_string(cols));
  }
}

void check_labels(const Mlp& mlp, std::span<const int> y, Eigen::Index rows, const char* what) {
  if (static_cast<Eigen::Index>(y.size()) != rows) {
    throw DimensionMismatch(std::string(what) + ": " + std::to_string(rows) + " rows but " +
                            std::to_string(y.size()) + " labels");
  }
  for (int label : y) {
    if (label < 0 || label >= mlp.network.output_size()) {
      throw DimensionMismatch(std::string(what) + ": label " + std::to_string(label) + " outside [0, " +
                              std::to_string(mlp.network.output_size()) + ")");
    }
  }
}

}  // namespace

Eigen::RowVectorXd forward(const Mlp& mlp, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  check_input(mlp, x.size());
  return forward_batch(mlp.network, x).row(0);
}

Eigen::MatrixXd forward_rows(const Mlp& mlp, const Eigen::Ref<const Eigen::MatrixXd>& x) {
  check_input(mlp, x.cols());
  return forward_batch(mlp.network, x);
}

Eigen::Index argmax(const Eigen::Ref<const Eigen::RowVectorXd>& probabilities) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < probabilities.size(); ++i) {
    if (probabilities(i) > probabilities(best)) best = i;
  }
  return best;
}

Prediction predict(const Mlp& mlp, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  const Eigen::RowVectorXd p = forward(mlp, x);
  const auto code = static_cast<int>(argmax(p));
  return {mlp.labels.size() > 0 ? mlp.labels.decode(code) : std::to_string(code), code, p(code)};
}

double accuracy(const Mlp& mlp, const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const int> y) {
  if (x.rows() == 0) return 0.0;
  const Eigen::MatrixXd p = forward_rows(mlp, x);
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    if (argmax(p.row(i)) == y[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(p.rows());
}

std::pair<Mlp, TrainReport> train(Mlp mlp, const Eigen::Ref<const Eigen::MatrixXd>& train_x,
                                  std::span<const int> train_y, const Eigen::Ref<const Eigen::MatrixXd>& valid_x,
                                  std::span<const int> valid_y) {
  const MlpConfig& cfg = mlp.config;
  cfg.validate();
  if (train_x.rows() == 0) throw EmptyDataset("training set is empty");
  check_input(mlp, train_x.cols());
  check_labels(mlp, train_y, train_x.rows(), "training set");
  const bool has_validation = valid_x.rows() > 0;
  if (has_validation) {
    check_input(mlp, valid_x.cols());
    check_labels(mlp, valid_y, valid_x.rows(), "validation set");
  }

  TrainReport report;
  report.seed = cfg.seed;
  // Batch order uses its own stream so that it does not depend on the layer sizes.
  Rng rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);

  const auto n = static_cast<std::size_t>(train_x.rows());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  Network<double> best = mlp.network;
  double best_accuracy = -1.0;
  int since_best = 0;
  Gradients<double> grads = zero_network<double>(cfg.layer_sizes);
  Eigen::MatrixXd batch_x;
  std::vector<int> batch_y;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
      batch_x.resize(static_cast<Eigen::Index>(stop - start), train_x.cols());
      batch_y.resize(stop - start);
      for (std::size_t r = start; r < stop; ++r) {
        batch_x.row(static_cast<Eigen::Index>(r - start)) = train_x.row(static_cast<Eigen::Index>(order[r]));
        batch_y[r - start] = train_y[order[r]];
      }
      loss_and_gradients(mlp.network, batch_x, std::span<const int>(batch_y), cfg.l2_lambda, &grads);
      for (int k = 0; k < 3; ++k) {
        mlp.network.weights[k] -= cfg.learning_rate * grads.weights[k];
        mlp.network.biases[k] -= cfg.learning_rate * grads.biases[k];
      }
    }

    const double epoch_loss = loss_and_gradients(mlp.network, train_x, train_y, cfg.l2_lambda, nullptr);
    report.train_loss.push_back(epoch_loss);
    report.epochs_run = epoch;
    if (!std::isfinite(epoch_loss) || !mlp.network.all_finite()) {
      throw DivergenceDetected("training loss became non-finite at epoch " + std::to_string(epoch) +
                               "; lower the learning rate");
    }

    if (!has_validation) {
      report.best_epoch = epoch;
      continue;
    }
    const double acc = accuracy(mlp, valid_x, valid_y);
    report.validation_accuracy.push_back(acc);
    if (acc > best_accuracy) {
      best_accuracy = acc;
      best = mlp.network;
      report.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      report.stopped_early = epoch < cfg.max_epochs;
      break;
    }
  }

  if (has_validation) mlp.network = std::move(best);
  return {std::move(mlp), std::move(report)};
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr char kMagic[8] = {'C', 'H', 'A', 'T', 'M', 'L', 'P', '\0'};

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

template <typename T>
void put_le(std::string& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  U bits;
  std::memcpy(&bits, &value, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get_le(const char* what) {
    need(sizeof(T), what);
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, &bits, sizeof(T));
    return value;
  }

  std::string_view take(std::size_t n, const char* what) {
    need(n, what);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t position() const { return pos_; }

 private:
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) throw CorruptModel(std::string("file truncated while reading ") + what);
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

nlohmann::json header_json(const Mlp& mlp) {
  const auto& c = mlp.config;
  return {
      {"kind", mlp.info.kind},
      {"threshold", mlp.info.threshold},
      {"config",
       {{"layer_sizes", c.layer_sizes},
        {"learning_rate", c.learning_rate},
        {"l2_lambda", c.l2_lambda},
        {"max_epochs", c.max_epochs},
        {"patience", c.patience},
        {"batch_size", c.batch_size},
        {"seed", c.seed}}},
      {"labels", mlp.labels.labels()},
      {"features", mlp.features},
  };
}

}  // namespace

void save_model(const Mlp& mlp, std::ostream& sink) {
  std::string out(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, kModelFormatVersion);
  const std::string header = header_json(mlp).dump();
  put_le<std::uint64_t>(out, header.size());
  out += header;
  for (int k = 0; k < 3; ++k) {
    const auto& w = mlp.network.weights[k];
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) put_le<double>(out, w(i, j));
    }
    const auto& b = mlp.network.biases[k];
    for (Eigen::Index j = 0; j < b.size(); ++j) put_le<double>(out, b(j));
  }
  put_le<std::uint64_t>(out, fnv1a(out));
  sink.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!sink) throw Error("IoError", "failed to write model");
}

Mlp load_model(std::istream& source) {
  std::stringstream buffer;
  buffer << source.rdbuf();
  const std::string bytes = buffer.str();
  Reader in(bytes);

  if (in.take(sizeof(kMagic), "magic") != std::string_view(kMagic, sizeof(kMagic))) {
    throw CorruptModel("not a model file (bad magic)");
  }
  const auto version = in.get_le<std::uint32_t>("format version");
  if (version != kModelFormatVersion) {
    throw VersionMismatch("model format version " + std::to_string(version) + " is not supported (expected " +
                          std::to_string(kModelFormatVersion) + ")");
  }
  const auto header_len = in.get_le<std::uint64_t>("header length");
  if (header_len > bytes.size()) throw CorruptModel("header length exceeds file size");
  const auto header_text = in.take(static_cast<std::size_t>(header_len), "header");

  Mlp mlp;
  try {
    const auto h = nlohmann::json::parse(header_text);
    const auto& c = h.at("config");
    mlp.config.layer_sizes = c.at("layer_sizes").get<std::array<int, 4>>();
    mlp.config.learning_rate = c.at("learning_rate").get<double>();
    mlp.config.l2_lambda = c.at("l2_lambda").get<double>();
    mlp.config.max_epochs = c.at("max_epochs").get<int>();
    mlp.config.patience = c.at("patience").get<int>();
    mlp.config.batch_size = c.at("batch_size").get<int>();
    mlp.config.seed = c.at("seed").get<std::uint64_t>();
    mlp.info.kind = h.at("kind").get<std::string>();
    mlp.info.threshold = h.at("threshold").get<double>();
    mlp.labels = LabelCodec(h.at("labels").get<std::vector<std::string>>());
    mlp.features = h.at("features").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw CorruptModel(std::string("bad header: ") + e.what());
  } catch (const InvalidConfig& e) {
    throw CorruptModel(std::string("bad header: ") + e.what());
  }
  try {
    mlp.config.validate();
  } catch (const InvalidConfig& e) {
    throw CorruptModel(std::string("bad config: ") + e.what());
  }
  const auto& sizes = mlp.config.layer_sizes;
  if (mlp.labels.size() != static_cast<std::size_t>(sizes[3])) throw CorruptModel("label count does not match output size");
  if (mlp.features.size() != static_cast<std::size_t>(sizes[0])) throw CorruptModel("feature count does not match input size");

  mlp.network = zero_network<double>(sizes);
  for (int k = 0; k < 3; ++k) {
    auto& w = mlp.network.weights[k];
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = in.get_le<double>("weights");
    }
    auto& b = mlp.network.biases[k];
    for (Eigen::Index j = 0; j < b.size(); ++j) b(j) = in.get_le<double>("biases");
  }
  const std::size_t payload_end = in.position();
  const auto checksum = in.get_le<std::uint64_t>("checksum");
  if (in.position() != bytes.size()) throw CorruptModel("trailing bytes after checksum");
  if (checksum != fnv1a(std::string_view(bytes).substr(0, payload_end))) throw CorruptModel("checksum mismatch");
  if (!mlp.network.all_finite()) throw CorruptModel("non-finite parameters");
  return mlp;
}

void save_model_file(const Mlp& mlp, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("IoError", "cannot open '" + path + "' for writing", ErrorFamily::runtime);
  save_model(mlp, out);
}

Mlp load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("IoError", "cannot open model file '" + path + "'");
  return load_model(in);
}

}  // namespace chatbot
