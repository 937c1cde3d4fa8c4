#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "stconv/error.hpp"
#include "stconv/eval/bench.hpp"
#include "stconv/eval/cv.hpp"
#include "stconv/eval/kfold.hpp"
#include "stconv/eval/pipeline.hpp"
#include "stconv/eval/plot.hpp"
#include "stconv/eval/projection.hpp"
#include "stconv/eval/synthetic.hpp"
#include "stconv/executor.hpp"
#include "stconv/features/descriptor.hpp"
#include "stconv/features/softmax_head.hpp"
#include "stconv/features/svm.hpp"
#include "stconv/io.hpp"
#include "stconv/net/accounting.hpp"
#include "stconv/net/builders.hpp"
#include "stconv/net/network.hpp"
#include "stconv/video/manifest.hpp"
#include "stconv/video/sampler.hpp"

namespace stconv::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  // shared
  std::string config;
  std::size_t threads = 0;
  std::uint64_t seed = 42;
  std::string out;
  std::string manifest;
  std::string net = "tiny-r2p1d";
  std::string extract_net = "c3d";
  std::string model;
  std::string descriptors;
  std::string svm;
  // sampler
  std::optional<std::size_t> clip_len, overlap;
  std::string resize, crop;
  std::optional<double> flip;
  bool shuffle_frames = false;
  // trainer
  std::optional<double> lr, lr_decay, momentum;
  std::optional<std::size_t> decay_interval, batch, epochs, clips_per_video;
  // svm
  double l2 = 1e-4, svm_step = 0.01;
  std::size_t svm_epochs = 200;
  // eval
  std::size_t k = 5;
  std::string fold_file;
  std::string head = "auto";
  // gen-synth
  std::size_t videos = 80, frames = 32, size = 32, square = 8, max_speed = 2;
  double noise = 0.05;
  std::string format = "ppm";
  // describe / bench
  std::size_t classes = 2, reps = 3, bench_batch = 1;
  // project
  std::string method = "pca";
  double perplexity = 30.0;
  std::size_t iterations = 1000;
};

void check_file(const std::string& path, const std::string& what) {
  require(!path.empty(), ErrorCode::invalid_config, what + " is required");
  require(fs::exists(path), ErrorCode::invalid_config, what + " not found: " + path);
}

std::pair<std::size_t, std::size_t> parse_size(const std::string& text, const std::string& flag) {
  const auto x = text.find('x');
  std::size_t a = 0, b = 0;
  bool ok = x != std::string::npos;
  if (ok) {
    auto r1 = std::from_chars(text.data(), text.data() + x, a);
    auto r2 = std::from_chars(text.data() + x + 1, text.data() + text.size(), b);
    ok = r1.ec == std::errc() && r1.ptr == text.data() + x && r2.ec == std::errc() &&
         r2.ptr == text.data() + text.size() && a > 0 && b > 0;
  }
  require(ok, ErrorCode::invalid_config, flag + " expects HxW, got '" + text + "'");
  return {a, b};
}

class Context {
 public:
  Context(const Options& o, std::ostream& out) : o_(o), out_(out) {
    std::size_t threads = o.threads;
    if (threads == 0) {
      if (const char* env = std::getenv("STCONV_THREADS")) {
        const std::string s = env;
        auto r = std::from_chars(s.data(), s.data() + s.size(), threads);
        require(r.ec == std::errc() && r.ptr == s.data() + s.size() && threads >= 1,
                ErrorCode::invalid_config, "STCONV_THREADS must be a positive integer");
      } else {
        threads = 1;
      }
    }
    executor_ = std::make_unique<Executor>(threads);
  }

  const Executor& executor() const { return *executor_; }
  std::ostream& out() const { return out_; }

  /// Fine-tuning settings: the network's defaults, then any explicit flags.
  features::FinetuneConfig finetune_config() const {
    features::FinetuneConfig cfg;
    if (o_.net == "tiny-r2p1d") cfg = eval::tiny_direction_recipe();
    auto& s = cfg.sampler;
    if (o_.clip_len) {
      s.clip_len = *o_.clip_len;
      s.overlap = s.clip_len / 2;
    }
    if (o_.overlap) s.overlap = *o_.overlap;
    if (!o_.resize.empty()) std::tie(s.resize_h, s.resize_w) = parse_size(o_.resize, "--resize");
    if (!o_.crop.empty()) std::tie(s.crop_h, s.crop_w) = parse_size(o_.crop, "--crop");
    if (o_.flip) s.flip_probability = *o_.flip;
    if (o_.lr) cfg.sgd.learning_rate = *o_.lr;
    if (o_.lr_decay) cfg.sgd.decay_factor = *o_.lr_decay;
    if (o_.decay_interval) cfg.sgd.decay_interval = *o_.decay_interval;
    if (o_.momentum) cfg.sgd.momentum = *o_.momentum;
    if (o_.batch) cfg.sgd.batch_size = *o_.batch;
    if (o_.epochs) cfg.epochs = *o_.epochs;
    if (o_.clips_per_video) cfg.clips_per_video = *o_.clips_per_video;
    cfg.shuffle_frames = o_.shuffle_frames;
    cfg.validate();
    return cfg;
  }

  net::NetSpec build_net(std::size_t classes, const video::SamplerConfig& s) const {
    require(s.crop_h == s.crop_w, ErrorCode::invalid_config, "networks need a square crop");
    return net::build_by_name(o_.net, classes, s.clip_len, s.crop_h);
  }

  /// Validates every path, then loads and prepares the videos.
  std::vector<video::VideoSource> load_videos(const video::SamplerConfig& s) const {
    check_file(o_.manifest, "--manifest");
    const auto m = video::read_manifest(o_.manifest);
    require(m.size() > 0, ErrorCode::empty_input, "manifest has no videos");
    for (const auto& e : m.entries) {
      require(fs::exists(m.resolve(e)), ErrorCode::invalid_config,
              "video " + e.video_id + " not found: " + m.resolve(e).string());
    }
    std::vector<video::VideoSource> out;
    for (const auto& e : m.entries) {
      auto v = video::load_video(e.video_id, m.resolve(e), e.label);
      require(v.frame_count() == e.frames, ErrorCode::format,
              "video " + e.video_id + " has " + std::to_string(v.frame_count()) +
                  " frames, manifest says " + std::to_string(e.frames));
      out.push_back(video::prepare_video(v, s));
    }
    return out;
  }

  static std::size_t class_count(const std::vector<video::VideoSource>& videos) {
    int top = 1;
    for (const auto& v : videos) {
      require(v.label >= 0, ErrorCode::label, "video " + v.id + " has no label");
      top = std::max(top, v.label);
    }
    return static_cast<std::size_t>(top) + 1;
  }

  net::Network make_network(const net::NetSpec& spec, Rng& rng) const {
    net::Network net(spec, rng);
    net.set_executor(executor_.get());
    if (!o_.model.empty()) net.load_state(load_checkpoint(o_.model));
    return net;
  }

 private:
  const Options& o_;
  std::ostream& out_;
  std::unique_ptr<Executor> executor_;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void cmd_gen_synth(const Options& o, const Context& ctx) {
  require(!o.out.empty(), ErrorCode::invalid_config, "--out is required");
  require(o.videos >= 2 && o.videos % 2 == 0, ErrorCode::invalid_config,
          "--videos must be a positive even number");
  require(o.format == "ppm" || o.format == "stt", ErrorCode::invalid_config,
          "--format must be ppm or stt");
  eval::SyntheticSpec spec;
  spec.videos_per_class = o.videos / 2;
  spec.frames = o.frames;
  spec.height = spec.width = o.size;
  spec.square = o.square;
  spec.max_speed = o.max_speed;
  spec.noise = o.noise;
  spec.seed = o.seed;
  spec.validate();
  const auto rows = eval::write_synthetic(
      spec, o.out, o.format == "stt" ? eval::FrameFormat::stt : eval::FrameFormat::ppm);
  ctx.out() << "wrote " << rows.size() << " videos to " << o.out << "\n";
}

void cmd_describe(const Options& o, const Context& ctx, bool frames_set, bool size_set) {
  const std::size_t frames = frames_set ? o.frames : (o.net == "tiny-r2p1d" ? 8 : 16);
  const std::size_t size = size_set ? o.size : (o.net == "tiny-r2p1d" ? 32 : 112);
  const auto spec = net::build_by_name(o.net, o.classes, frames, size);
  ctx.out() << net::describe(spec) << "# params " << net::count_params(spec) << "\n# flops "
            << net::count_flops(spec) << "\n";
}

void cmd_finetune(const Options& o, const Context& ctx) {
  require(!o.out.empty(), ErrorCode::invalid_config, "--out is required");
  const auto cfg = ctx.finetune_config();
  const auto videos = ctx.load_videos(cfg.sampler);
  const auto spec = ctx.build_net(Context::class_count(videos), cfg.sampler);
  Rng rng(o.seed);
  auto net = ctx.make_network(spec, rng);
  const auto result = features::finetune(net, videos, cfg, rng, [&](std::size_t e, std::size_t i, double loss) {
    ctx.out() << "epoch " << e << " iter " << i << " loss " << fmt("%.6f", loss) << "\n";
  });
  save_checkpoint(o.out, net.state());
  std::ostringstream log;
  log << "epoch,loss\n";
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
    log << e << "," << fmt("%.9g", result.epoch_loss[e]) << "\n";
  }
  write_text_atomic(fs::path(o.out).replace_extension(".loss.csv"), log.str());
  ctx.out() << "saved " << o.out << "\n";
}

void cmd_extract(const Options& o, const Context& ctx) {
  require(!o.out.empty(), ErrorCode::invalid_config, "--out is required");
  if (!o.model.empty()) check_file(o.model, "--model");
  const auto sampler = ctx.finetune_config().sampler;
  const auto videos = ctx.load_videos(sampler);
  const auto spec = ctx.build_net(Context::class_count(videos), sampler);
  Rng rng(o.seed);
  auto net = ctx.make_network(spec, rng);
  std::vector<features::VideoDescriptor> out;
  for (const auto& v : videos) {
    const auto fc6 = features::extract_fc6(net, video::eval_clips(v, sampler));
    out.push_back({v.id, features::aggregate_descriptor(fc6), v.label});
  }
  features::save_descriptors(o.out, out);
  ctx.out() << "extracted " << out.size() << " descriptors to " << o.out << "\n";
}

std::vector<int> signed_labels(const std::vector<features::VideoDescriptor>& d) {
  std::vector<int> y;
  for (const auto& v : d) {
    require(v.label == 0 || v.label == 1, ErrorCode::label,
            "svm needs labels 0 / 1, got " + std::to_string(v.label) + " for " + v.video_id);
    y.push_back(v.label == 1 ? 1 : -1);
  }
  return y;
}

void cmd_train_svm(const Options& o, const Context& ctx) {
  require(!o.out.empty(), ErrorCode::invalid_config, "--out is required");
  check_file(o.descriptors, "--descriptors");
  const auto d = features::load_descriptors(o.descriptors);
  const auto y = signed_labels(d);
  Rng rng(o.seed);
  const auto r = features::svm_train(features::descriptor_matrix(d), y,
                                     {o.l2, o.svm_epochs, o.svm_step}, rng);
  features::save_svm(o.out, r.model);
  ctx.out() << "objective " << fmt("%.6f", r.epoch_objective.back()) << "\nsaved " << o.out << "\n";
}

void cmd_predict(const Options& o, const Context& ctx) {
  require(!o.out.empty(), ErrorCode::invalid_config, "--out is required");
  std::ostringstream csv;
  csv << "video_id,label,predicted,score\n";
  std::size_t correct = 0, total = 0;
  auto emit = [&](const std::string& id, int label, int predicted, double score) {
    csv << id << "," << label << "," << predicted << "," << fmt("%.9g", score) << "\n";
    correct += label == predicted;
    ++total;
  };
  if (!o.svm.empty()) {
    check_file(o.svm, "--svm");
    check_file(o.descriptors, "--descriptors");
    const auto model = features::load_svm(o.svm);
    for (const auto& d : features::load_descriptors(o.descriptors)) {
      const auto p = features::svm_predict(model, d.vector.values());
      emit(d.video_id, d.label, p.label > 0 ? 1 : 0, p.score);
    }
  } else {
    check_file(o.model, "--model");
    const auto cfg = ctx.finetune_config();
    const auto videos = ctx.load_videos(cfg.sampler);
    const auto spec = ctx.build_net(Context::class_count(videos), cfg.sampler);
    Rng rng(o.seed);
    auto net = ctx.make_network(spec, rng);
    for (const auto& v : videos) {
      const Tensor p = features::predict_video(net, v, cfg.sampler, cfg.shuffle_frames, rng);
      const auto top = features::argmax(p.values());
      emit(v.id, v.label, static_cast<int>(top), p[top]);
    }
  }
  write_text_atomic(o.out, csv.str());
  ctx.out() << "accuracy " << fmt("%.4f", double(correct) / double(total)) << "\n";
}

void cmd_eval(const Options& o, const Context& ctx) {
  const fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
  std::string head = o.head;
  if (head == "auto") head = o.net == "c3d" ? "svm" : "softmax";
  require(head == "softmax" || head == "svm", ErrorCode::invalid_config,
          "--head must be auto, softmax or svm");
  if (!o.fold_file.empty()) check_file(o.fold_file, "--fold-file");
  const auto cfg = ctx.finetune_config();
  const auto videos = ctx.load_videos(cfg.sampler);
  std::vector<int> labels;
  std::vector<std::string> ids;
  for (const auto& v : videos) {
    labels.push_back(v.label);
    ids.push_back(v.id);
  }
  const std::size_t classes = Context::class_count(videos);
  const auto folds = o.fold_file.empty() ? eval::kfold_split(labels, o.k, o.seed)
                                         : eval::read_fold_file(o.fold_file, ids);
  const auto spec = ctx.build_net(classes, cfg.sampler);

  eval::CvSummary summary;
  if (head == "softmax") {
    eval::SoftmaxCvSetup setup{spec, cfg, o.seed, &ctx.executor(), nullptr};
    setup.progress = [&](std::size_t f, std::size_t e, std::size_t i, double loss) {
      ctx.out() << "fold " << f << " epoch " << e << " iter " << i << " loss " << fmt("%.6f", loss) << "\n";
    };
    summary = eval::evaluate_cv(folds, eval::softmax_pipeline(videos, setup));
  } else {
    Rng rng(o.seed);
    auto net = ctx.make_network(spec, rng);
    std::vector<features::VideoDescriptor> desc;
    for (const auto& v : videos) {
      auto clips = video::eval_clips(v, cfg.sampler);
      if (cfg.shuffle_frames) {
        for (auto& c : clips) video::shuffle_frames(c, rng);
      }
      desc.push_back({v.id, features::aggregate_descriptor(features::extract_fc6(net, clips)), v.label});
    }
    summary = eval::evaluate_cv(folds, eval::svm_pipeline(desc, {o.l2, o.svm_epochs, o.svm_step}, o.seed));
  }

  fs::create_directories(dir);
  write_text_atomic(dir / "report.csv", eval::format_report_csv(summary));
  write_text_atomic(dir / "summary.txt", eval::format_summary(summary));
  std::ostringstream pred;
  pred << "fold,video_id,label,predicted\n";
  for (const auto& f : summary.folds)
    for (const auto& p : f.predictions)
      pred << f.fold_index << "," << p.video_id << "," << p.truth << "," << p.predicted << "\n";
  write_text_atomic(dir / "predictions.csv", pred.str());
  ctx.out() << eval::format_summary(summary);
}

void cmd_project(const Options& o, const Context& ctx) {
  check_file(o.descriptors, "--descriptors");
  require(o.method == "pca" || o.method == "tsne", ErrorCode::invalid_config,
          "--method must be pca or tsne");
  const fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
  const auto d = features::load_descriptors(o.descriptors);
  const Tensor x = features::descriptor_matrix(d);
  Tensor embedding;
  std::string title;
  if (o.method == "pca") {
    const auto r = eval::project_pca(x, 2);
    embedding = r.projection;
    title = "PCA (" + fmt("%.3f", r.explained_ratio[0]) + ", " + fmt("%.3f", r.explained_ratio[1]) + ")";
    ctx.out() << "explained " << fmt("%.6f", r.explained_ratio[0]) << " "
              << fmt("%.6f", r.explained_ratio[1]) << "\n";
  } else {
    eval::TsneConfig cfg;
    cfg.perplexity = o.perplexity;
    cfg.iterations = o.iterations;
    cfg.seed = o.seed;
    embedding = eval::project_tsne(x, cfg);
    title = "t-SNE (perplexity " + fmt("%g", o.perplexity) + ")";
  }
  std::vector<std::string> ids;
  std::vector<int> classes;
  for (const auto& v : d) {
    ids.push_back(v.video_id);
    classes.push_back(v.label);
  }
  fs::create_directories(dir);
  write_text_atomic(dir / "embedding.csv", eval::format_embedding_csv(embedding, ids, classes));
  write_text_atomic(dir / "embedding.svg", eval::render_scatter_svg(embedding, classes, title));
  ctx.out() << "wrote " << (dir / "embedding.csv").string() << "\n";
}

void cmd_bench(const Options& o, const Context& ctx, bool frames_set, bool size_set) {
  const fs::path path = o.out.empty() ? fs::path("bench.csv") : fs::path(o.out);
  std::vector<eval::BenchRow> rows;
  std::stringstream names(o.net);
  std::string name;
  while (std::getline(names, name, ',')) {
    const std::size_t frames = frames_set ? o.frames : (name == "tiny-r2p1d" ? 8 : 16);
    const std::size_t size = size_set ? o.size : (name == "tiny-r2p1d" ? 32 : 112);
    const auto spec = net::build_by_name(name, o.classes, frames, size);
    rows.push_back(eval::benchmark_net(spec, o.bench_batch, o.reps, ctx.executor(), o.seed));
  }
  require(!rows.empty(), ErrorCode::invalid_config, "--net lists no networks");
  const std::string csv = eval::format_bench_csv(rows);
  write_text_atomic(path, csv);
  ctx.out() << csv;
}

/// key=value lines; blank lines and lines starting with '#' are skipped.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::invalid_config, "cannot open config file " + path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t number = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos && eq > 0, ErrorCode::invalid_config,
            path + ":" + std::to_string(number) + ": expected key=value");
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

bool given_on_command_line(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.rfind(flag + "=", 0) == 0;
  });
}

/// Appends config entries for options not given as flags.
std::vector<std::string> apply_config(std::vector<std::string> args, CLI::App& sub) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  for (const auto& [key, value] : read_config(path)) {
    const std::string flag = "--" + key;
    const CLI::Option* opt = sub.get_option_no_throw(flag);
    require(opt != nullptr && key != "config", ErrorCode::invalid_config,
            "unknown config key '" + key + "' for " + sub.get_name());
    if (given_on_command_line(args, flag)) continue;
    if (opt->get_expected_max() == 0) {
      if (value == "true" || value == "1" || value == "yes") args.push_back(flag);
      else require(value == "false" || value == "0" || value == "no", ErrorCode::invalid_config,
                   "config key '" + key + "' expects true or false");
    } else {
      args.push_back(flag);
      args.push_back(value);
    }
  }
  return args;
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_config:
    case ErrorCode::invalid_range:
    case ErrorCode::geometry:
    case ErrorCode::stratification:
      return 3;
    default:
      return 1;
  }
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app("Spatiotemporal convolution toolkit for video classification", "st-conv");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  auto common = [&](CLI::App* s) {
    s->add_option("--config", o.config, "key=value file; flags take precedence");
    s->add_option("--threads", o.threads, "worker threads (default: STCONV_THREADS or 1)")
        ->check(CLI::PositiveNumber);
    s->add_option("--seed", o.seed, "random seed")->capture_default_str();
  };
  auto sampler = [&](CLI::App* s) {
    s->add_option("--clip-len", o.clip_len, "frames per clip");
    s->add_option("--overlap", o.overlap, "frames shared by consecutive clips (default: half a clip)");
    s->add_option("--resize", o.resize, "resize target HxW, e.g. 128x171");
    s->add_option("--crop", o.crop, "crop HxW, e.g. 112x112");
    s->add_option("--flip", o.flip, "horizontal flip probability while training");
    s->add_flag("--shuffle-frames", o.shuffle_frames, "permute frames within every clip (control)");
  };
  auto trainer = [&](CLI::App* s) {
    s->add_option("--lr", o.lr, "initial learning rate");
    s->add_option("--lr-decay", o.lr_decay, "learning-rate decay factor");
    s->add_option("--decay-interval", o.decay_interval, "epochs between decays");
    s->add_option("--momentum", o.momentum, "SGD momentum");
    s->add_option("--batch", o.batch, "clips per mini-batch");
    s->add_option("--epochs", o.epochs, "training epochs");
    s->add_option("--clips-per-video", o.clips_per_video, "clips drawn per video and epoch");
  };
  auto svm_flags = [&](CLI::App* s) {
    s->add_option("--l2", o.l2, "SVM regularization")->capture_default_str();
    s->add_option("--svm-epochs", o.svm_epochs, "SVM epochs")->capture_default_str();
    s->add_option("--svm-step", o.svm_step, "SVM initial step size")->capture_default_str();
  };
  const char* nets = "c3d, r2p1d34, r3d34 or tiny-r2p1d";

  auto* gen = app.add_subcommand("gen-synth", "write the moving-square direction data set");
  common(gen);
  gen->add_option("--out", o.out, "output directory")->required();
  gen->add_option("--videos", o.videos, "total videos (even)")->capture_default_str();
  gen->add_option("--frames", o.frames, "frames per video")->capture_default_str();
  gen->add_option("--size", o.size, "frame height and width")->capture_default_str();
  gen->add_option("--square", o.square, "square side")->capture_default_str();
  gen->add_option("--max-speed", o.max_speed, "max pixels per frame")->capture_default_str();
  gen->add_option("--noise", o.noise, "pixel noise std")->capture_default_str();
  gen->add_option("--format", o.format, "ppm or stt")->capture_default_str();

  auto* desc = app.add_subcommand("describe", "print a network's layer manifest");
  common(desc);
  desc->add_option("--net", o.net, nets)->required();
  auto* desc_frames = desc->add_option("--frames", o.frames, "clip length");
  auto* desc_size = desc->add_option("--size", o.size, "input height and width");
  desc->add_option("--classes", o.classes, "output classes")->capture_default_str();

  auto* ft = app.add_subcommand("finetune", "train a network with the softmax head");
  common(ft);
  sampler(ft);
  trainer(ft);
  ft->add_option("--manifest", o.manifest, "dataset manifest")->required();
  ft->add_option("--net", o.net, nets)->capture_default_str();
  ft->add_option("--model", o.model, "checkpoint to start from");
  ft->add_option("--out", o.out, "checkpoint to write")->required();

  auto* ex = app.add_subcommand("extract", "write fc6 video descriptors");
  common(ex);
  sampler(ex);
  ex->add_option("--manifest", o.manifest, "dataset manifest")->required();
  ex->add_option("--net", o.extract_net, "network with an fc6 layer")->capture_default_str();
  ex->add_option("--model", o.model, "checkpoint (random weights from --seed otherwise)");
  ex->add_option("--out", o.out, "descriptor file (.stt)")->required();

  auto* ts = app.add_subcommand("train-svm", "train a linear SVM on descriptors");
  common(ts);
  svm_flags(ts);
  ts->add_option("--descriptors", o.descriptors, "descriptor file")->required();
  ts->add_option("--out", o.out, "model file")->required();

  auto* pr = app.add_subcommand("predict", "predict videos with an SVM or a fine-tuned network");
  common(pr);
  sampler(pr);
  pr->add_option("--svm", o.svm, "SVM model (with --descriptors)");
  pr->add_option("--descriptors", o.descriptors, "descriptor file");
  pr->add_option("--manifest", o.manifest, "dataset manifest (with --model)");
  pr->add_option("--model", o.model, "network checkpoint");
  pr->add_option("--net", o.net, nets)->capture_default_str();
  pr->add_option("--out", o.out, "predictions CSV")->required();

  auto* ev = app.add_subcommand("eval", "k-fold cross-validation");
  common(ev);
  sampler(ev);
  trainer(ev);
  svm_flags(ev);
  ev->add_option("--manifest", o.manifest, "dataset manifest")->required();
  ev->add_option("--net", o.net, nets)->capture_default_str();
  ev->add_option("--k", o.k, "folds")->capture_default_str();
  ev->add_option("--fold-file", o.fold_file, "fixed video_id,fold assignment");
  ev->add_option("--head", o.head, "auto, softmax or svm")->capture_default_str();
  ev->add_option("--out", o.out, "output directory (default: current)");

  auto* pj = app.add_subcommand("project", "2-D embedding of descriptors");
  common(pj);
  pj->add_option("--descriptors", o.descriptors, "descriptor file")->required();
  pj->add_option("--method", o.method, "pca or tsne")->capture_default_str();
  pj->add_option("--perplexity", o.perplexity, "t-SNE perplexity")->capture_default_str();
  pj->add_option("--iterations", o.iterations, "t-SNE iterations")->capture_default_str();
  pj->add_option("--out", o.out, "output directory (default: current)");

  auto* be = app.add_subcommand("bench", "time forward passes and count FLOPs");
  common(be);
  be->add_option("--net", o.net, "comma-separated networks")->capture_default_str();
  auto* be_frames = be->add_option("--frames", o.frames, "clip length");
  auto* be_size = be->add_option("--size", o.size, "input height and width");
  be->add_option("--batch", o.bench_batch, "clips per forward pass")->capture_default_str();
  be->add_option("--reps", o.reps, "repetitions")->capture_default_str();
  be->add_option("--classes", o.classes, "output classes")->capture_default_str();
  be->add_option("--out", o.out, "CSV path (default: bench.csv)");

  try {
    std::vector<std::string> argv = args;
    if (!argv.empty()) {
      if (CLI::App* sub = app.get_subcommand_no_throw(argv.front())) argv = apply_config(argv, *sub);
    }
    std::reverse(argv.begin(), argv.end());
    try {
      app.parse(argv);
    } catch (const CLI::CallForHelp&) {
      const auto subs = app.get_subcommands();
      out << (subs.empty() ? app.help() : subs.front()->help());
      return 0;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return 0;
    } catch (const CLI::ParseError& e) {
      err << "usage: " << one_line(e.what()) << "\n";
      return 2;
    }
    CLI::App* s = app.get_subcommands().front();
    const std::string name = s->get_name();
    if (name == "extract") o.net = o.extract_net;
    Context ctx(o, out);
    if (name == "gen-synth") cmd_gen_synth(o, ctx);
    else if (name == "describe") cmd_describe(o, ctx, desc_frames->count() > 0, desc_size->count() > 0);
    else if (name == "finetune") cmd_finetune(o, ctx);
    else if (name == "extract") cmd_extract(o, ctx);
    else if (name == "train-svm") cmd_train_svm(o, ctx);
    else if (name == "predict") cmd_predict(o, ctx);
    else if (name == "eval") cmd_eval(o, ctx);
    else if (name == "project") cmd_project(o, ctx);
    else if (name == "bench") cmd_bench(o, ctx, be_frames->count() > 0, be_size->count() > 0);
    return 0;
  } catch (const Error& e) {
    err << to_string(e.code()) << ": " << one_line(e.what()) << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    err << "runtime: " << one_line(e.what()) << "\n";
    return 1;
  }
}

}  // namespace stconv::cli
