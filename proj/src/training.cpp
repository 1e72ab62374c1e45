#include "ocular/training.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <opencv2/imgproc.hpp>
#include <sstream>

#include "ocular/image_io.hpp"
#include "ocular/rng.hpp"

namespace ocular {

namespace {

Tensor stack_batch(const std::vector<Tensor>& samples) {
    const Tensor& first = samples.front();
    Tensor out({static_cast<int>(samples.size()), first.dim(0), first.dim(1), first.dim(2)});
    std::int64_t per = first.size();
    for (std::size_t i = 0; i < samples.size(); ++i)
        std::copy(samples[i].data.begin(), samples[i].data.end(),
                  out.data.begin() + static_cast<std::int64_t>(i) * per);
    return out;
}

std::string layer_norms(Network& net) {
    std::ostringstream os;
    for (auto& layer : net.layers) {
        double n2 = 0.0;
        for (Tensor* p : layer->params())
            for (double v : p->data) n2 += v * v;
        if (!layer->params().empty()) os << " " << layer->name() << "=" << std::sqrt(n2);
    }
    return os.str();
}

double validation_loss(Network& net, const std::vector<TrainSample>& val_set, int batch_size) {
    double total = 0.0;
    std::size_t done = 0;
    int h = net.config.input_h, w = net.config.input_w;
    while (done < val_set.size()) {
        std::size_t take = std::min<std::size_t>(batch_size, val_set.size() - done);
        std::vector<Tensor> inputs;
        Tensor targets({static_cast<int>(take), 2});
        for (std::size_t i = 0; i < take; ++i) {
            const TrainSample& s = val_set[done + i];
            inputs.push_back(prepare_input(s.image, w, h));
            targets.at2(static_cast<int>(i), 0) = s.valence;
            targets.at2(static_cast<int>(i), 1) = s.arousal;
        }
        Tensor pred = net.forward(stack_batch(inputs), Mode::Infer);
        total += mse_dual_loss(pred, targets).value * static_cast<double>(take);
        done += take;
    }
    return total / static_cast<double>(val_set.size());
}

}  // namespace

TrainHistory train(Network& net, const std::vector<TrainSample>& train_set,
                   const std::vector<TrainSample>& val_set, const TrainConfig& cfg) {
    if (train_set.empty()) throw std::invalid_argument("train: empty training set");
    if (val_set.empty()) throw std::invalid_argument("train: empty validation set");
    if (cfg.batch_size < 2) throw std::invalid_argument("train: batch size must be >= 2 (batch norm)");
    if (static_cast<std::size_t>(cfg.batch_size) > train_set.size())
        throw std::invalid_argument("train: batch size exceeds training set size");
    if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");

    const int h = net.config.input_h, w = net.config.input_w;
    auto params = net.params();
    Adam adam(cfg.adam, params);

    TrainHistory history;
    double best_val = std::numeric_limits<double>::infinity();

    std::vector<std::size_t> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        auto t0 = std::chrono::steady_clock::now();
        if (cfg.shuffle) {
            Rng rng(mix64(cfg.seed, 0x73687566ULL /* "shuf" */, static_cast<std::uint64_t>(epoch)));
            for (std::size_t i = order.size(); i > 1; --i)
                std::swap(order[i - 1], order[uniform_index(rng, i)]);
        }

        double epoch_loss = 0.0;
        int batches = 0;
        std::size_t n_batches = train_set.size() / cfg.batch_size;  // drop trailing partial batch
        for (std::size_t b = 0; b < n_batches; ++b) {
            std::vector<Tensor> inputs;
            Tensor targets({cfg.batch_size, 2});
            for (int i = 0; i < cfg.batch_size; ++i) {
                std::size_t idx = order[b * cfg.batch_size + i];
                const TrainSample& s = train_set[idx];
                // seed depends on the sample's stable index, not its
                // position after shuffling
                std::uint64_t sample_seed =
                    mix64(cfg.seed, static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(idx));
                inputs.push_back(cfg.augment_enabled
                                     ? augment_pipeline(s.image, cfg.augment, w, h, sample_seed)
                                     : prepare_input(s.image, w, h));
                targets.at2(i, 0) = s.valence;
                targets.at2(i, 1) = s.arousal;
            }
            Tensor pred = net.forward(stack_batch(inputs), Mode::Train);
            DualLoss loss = mse_dual_loss(pred, targets);
            if (!std::isfinite(loss.value))
                throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                                         " batch " + std::to_string(b) + "; parameter norms:" +
                                         layer_norms(net));
            net.zero_grads();
            net.backward(loss.grad);
            adam.step(params, net.grads());
            epoch_loss += loss.value;
            ++batches;
        }

        LossRecord rec;
        rec.epoch = epoch + 1;
        rec.train_loss = epoch_loss / std::max(batches, 1);
        rec.val_loss = validation_loss(net, val_set, cfg.batch_size);
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        history.records.push_back(rec);

        if (!cfg.checkpoint_dir.empty()) {
            std::filesystem::create_directories(cfg.checkpoint_dir);
            save_checkpoint(net, cfg.checkpoint_dir + "/last.ckpt", &adam);
            if (rec.val_loss < best_val) {
                best_val = rec.val_loss;
                save_checkpoint(net, cfg.checkpoint_dir + "/best.ckpt", &adam);
            }
        }
    }
    return history;
}

Tensor predict(Network& net, const Tensor& inputs) {
    if (inputs.ndim() != 4)
        throw std::invalid_argument("predict: expected (N, h, w, 3) inputs, got " +
                                    shape_str(inputs.shape));
    return net.forward(inputs, Mode::Infer);
}

Tensor predict_samples(Network& net, const std::vector<TrainSample>& samples) {
    if (samples.empty()) throw std::invalid_argument("predict_samples: no samples");
    std::vector<Tensor> inputs;
    inputs.reserve(samples.size());
    for (const TrainSample& s : samples)
        inputs.push_back(prepare_input(s.image, net.config.input_w, net.config.input_h));
    return predict(net, stack_batch(inputs));
}

Tensor targets_of(const std::vector<TrainSample>& samples) {
    Tensor t({static_cast<int>(samples.size()), 2});
    for (std::size_t i = 0; i < samples.size(); ++i) {
        t.at2(static_cast<int>(i), 0) = samples[i].valence;
        t.at2(static_cast<int>(i), 1) = samples[i].arousal;
    }
    return t;
}

void export_history_csv(const TrainHistory& history, const std::string& path) {
    if (history.records.empty()) throw std::invalid_argument("export_history_csv: empty history");
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os.precision(17);
    os << "epoch,train_loss,val_loss,seconds\n";
    for (const LossRecord& r : history.records)
        os << r.epoch << ',' << r.train_loss << ',' << r.val_loss << ',' << r.seconds << '\n';
}

TrainHistory load_history_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path);
    TrainHistory h;
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        LossRecord r;
        char c;
        std::istringstream ss(line);
        ss >> r.epoch >> c >> r.train_loss >> c >> r.val_loss >> c >> r.seconds;
        h.records.push_back(r);
    }
    return h;
}

void export_loss_plot(const std::vector<std::pair<std::string, TrainHistory>>& histories,
                      const std::string& path) {
    if (histories.empty() || histories.front().second.records.empty())
        throw std::invalid_argument("export_loss_plot: empty history");

    const int W = 800, panel_h = 260, margin = 40;
    cv::Mat canvas(2 * panel_h, W, CV_8UC3, cv::Scalar(255, 255, 255));
    const std::vector<cv::Scalar> colors = {{200, 60, 60}, {60, 160, 60}, {60, 60, 220}, {180, 120, 30}};

    for (int panel = 0; panel < 2; ++panel) {  // 0: train, 1: validation
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        std::size_t max_n = 0;
        for (const auto& [label, h] : histories)
            for (const LossRecord& r : h.records) {
                double v = panel == 0 ? r.train_loss : r.val_loss;
                lo = std::min(lo, v);
                hi = std::max(hi, v);
                max_n = std::max(max_n, h.records.size());
            }
        if (hi <= lo) hi = lo + 1.0;

        int y_top = panel * panel_h + margin / 2, y_bot = (panel + 1) * panel_h - margin / 2;
        cv::rectangle(canvas, {margin, y_top}, {W - margin / 2, y_bot}, {0, 0, 0});
        cv::putText(canvas, panel == 0 ? "train loss" : "validation loss",
                    {margin + 5, y_top + 18}, cv::FONT_HERSHEY_SIMPLEX, 0.5, {0, 0, 0}, 1);

        for (std::size_t hi_idx = 0; hi_idx < histories.size(); ++hi_idx) {
            const auto& recs = histories[hi_idx].second.records;
            cv::Scalar color = colors[hi_idx % colors.size()];
            cv::Point prev;
            for (std::size_t i = 0; i < recs.size(); ++i) {
                double v = panel == 0 ? recs[i].train_loss : recs[i].val_loss;
                int x = margin + static_cast<int>((W - margin * 1.5) * (max_n > 1 ? static_cast<double>(i) / (max_n - 1) : 0.0));
                int y = y_bot - static_cast<int>((y_bot - y_top - 25) * (v - lo) / (hi - lo));
                cv::Point cur(x, y);
                if (i) cv::line(canvas, prev, cur, color, 1, cv::LINE_AA);
                prev = cur;
            }
            cv::putText(canvas, histories[hi_idx].first,
                        {W - 120, y_top + 18 + 16 * static_cast<int>(hi_idx)},
                        cv::FONT_HERSHEY_SIMPLEX, 0.45, color, 1);
        }
    }
    save_rgb(canvas, path);
}

}  // namespace ocular
