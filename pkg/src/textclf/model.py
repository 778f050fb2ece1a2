"""Multichannel convolutional-recurrent text classifier, linear and
instance-based baselines over TF-IDF features, a bag-of-features linear
classifier with subword buckets, and prediction averaging.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .base import ConfigurationError, ParamsMixin, check_random_state, derive_seed
from .corpus import Vocabulary, build_vocabulary, encode_document
from .embeddings import EmbeddingModel, TrainSpec, subword_ngrams, vector
from .eval import confusion_matrix, macro_prf
from . import nn
from .nn import Tensor

__all__ = [
    "ConvLstmConfig",
    "TrainHistory",
    "ConvLstmNetwork",
    "build_conv_lstm",
    "train_network",
    "predict_proba",
    "ConvLstmClassifier",
    "tfidf_features",
    "TfidfFeaturizer",
    "train_baseline",
    "BaselineModel",
    "TfidfClassifier",
    "load_classifier",
    "fasttext_doc_loss_and_grads",
    "fasttext_linear_classifier",
    "FastTextClassifier",
    "ensemble_average",
    "ensemble_predict",
]


@dataclass
class ConvLstmConfig:
    """Architecture and regularization settings for the classifier graph."""

    seq_len: int = 100
    emb_dim: int = 300
    kernel_sizes: tuple = (4, 6, 8)
    filters_per_channel: int = 100
    pool: int = 4
    lstm_units: int = 100
    dropout_rate: float = 0.5
    noise_sigma: float = 0.1
    n_classes: int = 2
    embedding_init: str = "random"
    freeze_embeddings: bool = False
    loss_kind: str = "categorical"
    lstm_mode: str = "dense"
    lstm_branch: str = "final"
    peephole: bool = False

    def __post_init__(self):
        for name in ("seq_len", "emb_dim", "filters_per_channel", "pool", "lstm_units"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be positive")
        if not self.kernel_sizes:
            raise ConfigurationError("kernel_sizes must be non-empty")
        if any(k < 1 for k in self.kernel_sizes):
            raise ConfigurationError("kernel sizes must be positive")
        if self.n_classes < 2:
            raise ConfigurationError(f"n_classes must be >= 2, got {self.n_classes}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ConfigurationError("dropout_rate must be in [0, 1)")
        if self.noise_sigma < 0:
            raise ConfigurationError("noise_sigma must be >= 0")
        if self.embedding_init not in ("random", "pretrained"):
            raise ConfigurationError(f"unknown embedding_init {self.embedding_init!r}")
        if self.loss_kind not in ("categorical", "binary"):
            raise ConfigurationError(f"unknown loss_kind {self.loss_kind!r}")
        if self.loss_kind == "binary" and self.n_classes != 2:
            raise ConfigurationError("binary loss requires exactly 2 classes")
        if self.lstm_branch not in ("final", "temporal_max"):
            raise ConfigurationError(f"unknown lstm_branch {self.lstm_branch!r}")

    @property
    def concat_width(self) -> int:
        return len(self.kernel_sizes) * self.filters_per_channel + self.lstm_units


@dataclass
class TrainHistory:
    train_loss: list = field(default_factory=list)
    valid_loss: list = field(default_factory=list)
    valid_macro_f1: list = field(default_factory=list)
    wall_time: float = 0.0


class ConvLstmNetwork:
    """Embedding lookup feeding parallel convolution channels and a
    recurrent branch, concatenated into a softmax head.

    Per channel: same-padded convolution -> ReLU -> dropout -> max pooling
    -> global max, one vector of ``filters_per_channel`` per kernel size.
    The recurrent branch contributes its final hidden state (or the
    temporal max of hidden states).  Row 0 of the embedding is the padding
    vector and stays zero through training.
    """

    def __init__(self, cfg: ConvLstmConfig, vocab_size: int, seed: int = 0,
                 embeddings: Optional[EmbeddingModel] = None,
                 vocab: Optional[Vocabulary] = None,
                 oov_strategy: str = "uniform"):
        self.cfg = cfg
        self.vocab_size = vocab_size
        self.seed = seed
        rng = check_random_state(derive_seed(seed, "init"))
        d = cfg.emb_dim

        emb = rng.uniform(-0.5 / d, 0.5 / d, size=(vocab_size + 1, d)).astype(np.float32)
        if cfg.embedding_init == "pretrained":
            if embeddings is None or vocab is None:
                raise ConfigurationError("pretrained init needs an embedding model and a vocabulary")
            if embeddings.dim != d:
                raise ConfigurationError(
                    f"embedding dim {embeddings.dim} != configured emb_dim {d}"
                )
            strategy = oov_strategy
            if strategy == "subword" and embeddings.kind != "subword":
                strategy = "uniform"
            for token, token_id in vocab.token_to_id.items():
                if token in embeddings.vocab:
                    emb[token_id] = embeddings.input_vectors[embeddings.vocab.token_to_id[token]]
                else:
                    emb[token_id] = vector(embeddings, token, oov_strategy=strategy)
        emb[0] = 0.0
        self.embedding = Tensor(emb, requires_grad=not cfg.freeze_embeddings)

        self.channels = []
        for ksize in cfg.kernel_sizes:
            bound = np.sqrt(6.0 / (ksize * d + cfg.filters_per_channel))
            kernels = Tensor(
                rng.uniform(-bound, bound, size=(ksize, d, cfg.filters_per_channel)).astype(np.float32),
                requires_grad=True,
            )
            bias = Tensor(np.zeros(cfg.filters_per_channel, dtype=np.float32), requires_grad=True)
            self.channels.append((ksize, kernels, bias))

        self.lstm = nn.init_lstm_params(
            d,
            cfg.lstm_units,
            mode=cfg.lstm_mode,
            seq_len=cfg.seq_len,
            peephole=cfg.peephole,
            rng=rng,
        )

        head_in = cfg.concat_width
        bound = np.sqrt(6.0 / (head_in + cfg.n_classes))
        self.head_w = Tensor(
            rng.uniform(-bound, bound, size=(head_in, cfg.n_classes)).astype(np.float32),
            requires_grad=True,
        )
        self.head_b = Tensor(np.zeros(cfg.n_classes, dtype=np.float32), requires_grad=True)

    def parameters(self) -> dict:
        params = {}
        if not self.cfg.freeze_embeddings:
            params["embedding"] = self.embedding
        for idx, (ksize, kernels, bias) in enumerate(self.channels):
            params[f"conv{idx}_k{ksize}_kernels"] = kernels
            params[f"conv{idx}_k{ksize}_bias"] = bias
        for name, tensor in self.lstm.tensors().items():
            params[f"lstm_{name}"] = tensor
        params["head_w"] = self.head_w
        params["head_b"] = self.head_b
        return params

    def _replica(self) -> "ConvLstmNetwork":
        """Shallow copy sharing weight arrays but owning its gradients.

        Replicas let shards run forward/backward concurrently without
        racing on grad buffers; weights are only read during the pass.
        """

        def share(tensor: Tensor) -> Tensor:
            dup = Tensor.__new__(Tensor)
            dup.data = tensor.data
            dup.grad = None
            dup.requires_grad = tensor.requires_grad
            dup._parents = ()
            dup._backward = None
            return dup

        dup = object.__new__(ConvLstmNetwork)
        dup.cfg = self.cfg
        dup.vocab_size = self.vocab_size
        dup.seed = self.seed
        dup.embedding = share(self.embedding)
        dup.channels = [
            (ksize, share(kernels), share(bias))
            for ksize, kernels, bias in self.channels
        ]
        dup.lstm = nn.LstmParams(
            w_x={g: share(t) for g, t in self.lstm.w_x.items()},
            w_h={g: share(t) for g, t in self.lstm.w_h.items()},
            b={g: share(t) for g, t in self.lstm.b.items()},
            w_c=(
                {g: share(t) for g, t in self.lstm.w_c.items()}
                if self.lstm.w_c is not None else None
            ),
            mode=self.lstm.mode,
        )
        dup.head_w = share(self.head_w)
        dup.head_b = share(self.head_b)
        return dup

    def all_arrays(self) -> dict:
        arrays = {"embedding": self.embedding.data}
        for idx, (ksize, kernels, bias) in enumerate(self.channels):
            arrays[f"conv{idx}_k{ksize}_kernels"] = kernels.data
            arrays[f"conv{idx}_k{ksize}_bias"] = bias.data
        for name, tensor in self.lstm.tensors().items():
            arrays[f"lstm_{name}"] = tensor.data
        arrays["head_w"] = self.head_w.data
        arrays["head_b"] = self.head_b.data
        return arrays

    def forward(self, ids: np.ndarray, train_mode: bool = False, rng=None,
                trace: Optional[dict] = None) -> Tensor:
        """Class probability rows for a batch of encoded documents."""
        ids = np.asarray(ids, dtype=np.int64)
        single = ids.ndim == 1
        if single:
            ids = ids[None, :]
        if ids.shape[1] != self.cfg.seq_len:
            raise nn.ShapeError(
                f"encoded length {ids.shape[1]} != configured seq_len {self.cfg.seq_len}"
            )
        rng = check_random_state(rng)
        cfg = self.cfg
        emb = nn.embedding_lookup(self.embedding, ids)
        if trace is not None:
            trace["embedded"] = emb.shape[1:]
        emb = nn.gaussian_noise(emb, cfg.noise_sigma, train_mode, rng)

        branch_outputs = []
        for idx, (ksize, kernels, bias) in enumerate(self.channels):
            conv = nn.relu(nn.conv1d(emb, kernels, bias))
            if trace is not None:
                trace[f"channel{idx}_conv"] = conv.shape[1:]
            conv = nn.dropout(conv, cfg.dropout_rate, train_mode, rng)
            pooled = nn.maxpool1d(conv, cfg.pool)
            if trace is not None:
                trace[f"channel{idx}_pooled"] = pooled.shape[1:]
            channel_vec = nn.global_maxpool(pooled)
            if trace is not None:
                trace[f"channel{idx}_vector"] = channel_vec.shape[1:]
            branch_outputs.append(channel_vec)

        steps = [emb[:, t, :] for t in range(cfg.seq_len)]
        hidden_states, final_state = nn.lstm_forward(steps, self.lstm)
        if cfg.lstm_branch == "final":
            lstm_vec = final_state.hidden
        else:
            lstm_vec = hidden_states[0]
            for h in hidden_states[1:]:
                lstm_vec = lstm_vec.maximum(h)
        if trace is not None:
            trace["lstm_vector"] = lstm_vec.shape[1:]
        branch_outputs.append(lstm_vec)

        merged = nn.concat(branch_outputs, axis=-1)
        if trace is not None:
            trace["concatenated"] = merged.shape[1:]
        merged = nn.dropout(merged, cfg.dropout_rate, train_mode, rng)
        logits = nn.dense(merged, self.head_w, self.head_b)
        probs = nn.softmax(logits)
        return probs[0] if single else probs

    def shape_trace(self) -> dict:
        """Intermediate shapes (batch dimension removed) for one document."""
        trace: dict = {}
        ids = np.zeros((1, self.cfg.seq_len), dtype=np.int64)
        self.forward(ids, train_mode=False, trace=trace)
        return {name: tuple(shape) for name, shape in trace.items()}


def build_conv_lstm(cfg: ConvLstmConfig, embeddings: Optional[EmbeddingModel] = None,
                    vocab: Optional[Vocabulary] = None, seed: int = 0,
                    oov_strategy: str = "uniform") -> ConvLstmNetwork:
    if vocab is None:
        raise ConfigurationError("build_conv_lstm needs a vocabulary")
    return ConvLstmNetwork(
        cfg, len(vocab), seed=seed, embeddings=embeddings, vocab=vocab,
        oov_strategy=oov_strategy,
    )


def _batch_loss(net: ConvLstmNetwork, ids, labels, train_mode, rng):
    probs = net.forward(ids, train_mode=train_mode, rng=rng)
    if net.cfg.loss_kind == "binary":
        target = labels.astype(np.float32)
        return nn.cross_entropy_loss(probs[:, 1], target, kind="binary"), probs
    target = nn.one_hot(labels, net.cfg.n_classes)
    return nn.cross_entropy_loss(probs, target, kind="categorical"), probs


def train_network(net: ConvLstmNetwork, train_data, valid_data=None, epochs: int = 10,
                  batch_size: int = 128, learning_rate: float = 0.05, seed: int = 0,
                  threads: int = 1, optimizer=nn.Adagrad) -> TrainHistory:
    """Mini-batch training of the classifier graph.

    ``train_data``/``valid_data`` are (ids, labels) pairs of integer
    arrays.  ``optimizer`` is a factory called as
    optimizer(params, learning_rate=...); the adaptive-gradient default
    matches the rest of the workbench.  Dropout and noise are active only
    while training; the embedding padding row is pinned to zero.  Runs
    are deterministic for a fixed seed and thread count.
    """
    ids, labels = train_data
    ids = np.asarray(ids, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if len(ids) == 0:
        raise ValueError("training set is empty")
    history = TrainHistory()
    if epochs == 0:
        return history
    start = time.perf_counter()
    optimizer = optimizer(net.parameters(), learning_rate=learning_rate)
    shuffle_rng = check_random_state(derive_seed(seed, "shuffle"))
    layer_rng = check_random_state(derive_seed(seed, "layers"))
    for _ in range(epochs):
        order = shuffle_rng.permutation(len(ids))
        epoch_loss = 0.0
        n_batches = 0
        for lo in range(0, len(ids), batch_size):
            batch = order[lo : lo + batch_size]
            loss = _train_batch(net, ids, labels, batch, optimizer, layer_rng, threads)
            epoch_loss += loss
            n_batches += 1
        history.train_loss.append(epoch_loss / n_batches)
        if valid_data is not None:
            v_loss, v_f1 = _evaluate(net, valid_data)
            history.valid_loss.append(v_loss)
            history.valid_macro_f1.append(v_f1)
    history.wall_time = time.perf_counter() - start
    return history


def _train_batch(net, ids, labels, batch, optimizer, layer_rng, threads):
    optimizer.zero_grad()
    if threads <= 1:
        loss, _ = _batch_loss(net, ids[batch], labels[batch], True, layer_rng)
        loss.backward()
        loss_value = float(loss.data)
    else:
        # Data-parallel accumulation: each shard runs forward/backward on
        # its own replica, then gradients reduce in fixed shard order so
        # results are reproducible for a given thread count.
        from concurrent.futures import ThreadPoolExecutor

        shards = np.array_split(batch, threads)
        shards = [s for s in shards if len(s)]
        seeds = [int(layer_rng.integers(2**31)) for _ in shards]
        replicas = [net._replica() for _ in shards]

        def run(index):
            loss, _ = _batch_loss(
                replicas[index], ids[shards[index]], labels[shards[index]],
                True, check_random_state(seeds[index]),
            )
            loss.backward()
            return len(shards[index]), float(loss.data)

        with ThreadPoolExecutor(max_workers=len(shards)) as pool:
            results = list(pool.map(run, range(len(shards))))
        total = sum(n for n, _ in results)
        loss_value = sum(n * l for n, l in results) / total
        master_params = net.parameters()
        for name, master in master_params.items():
            pieces = []
            for (n, _), replica in zip(results, replicas):
                rep_grad = replica.parameters()[name].grad
                if rep_grad is not None:
                    pieces.append((n / total) * rep_grad)
            if pieces:
                acc = pieces[0].copy()
                for piece in pieces[1:]:
                    acc += piece
                master.grad = acc
    if net.embedding.requires_grad and net.embedding.grad is not None:
        net.embedding.grad[0] = 0.0
    optimizer.step()
    return loss_value


def _evaluate(net, data) -> tuple[float, float]:
    ids, labels = data
    ids = np.asarray(ids, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    losses = []
    preds = []
    for lo in range(0, len(ids), 256):
        chunk = slice(lo, lo + 256)
        loss, probs = _batch_loss(net, ids[chunk], labels[chunk], False, None)
        losses.append(float(loss.data) * (min(lo + 256, len(ids)) - lo))
        preds.extend(np.argmax(probs.data, axis=1).tolist())
    classes = list(range(net.cfg.n_classes))
    matrix = confusion_matrix(labels.tolist(), preds, classes)
    _, _, f1, _ = macro_prf(matrix)
    return sum(losses) / len(ids), f1


def predict_proba(net: ConvLstmNetwork, encoded) -> np.ndarray:
    """Eval-mode class distribution(s) for one or many encoded documents."""
    out = net.forward(np.asarray(encoded, dtype=np.int64), train_mode=False)
    return out.data.copy()


class ConvLstmClassifier(ParamsMixin):
    """Estimator facade: builds its own vocabulary and encodings in fit.

    ``embeddings`` may hold a trained EmbeddingModel; with
    ``embedding_init='pretrained'`` the embedding layer starts from those
    vectors (out-of-vocabulary rows filled per ``oov_strategy``).
    """

    def __init__(self, seq_len=100, emb_dim=300, kernel_sizes=(4, 6, 8),
                 filters_per_channel=100, pool=4, lstm_units=100, dropout_rate=0.5,
                 noise_sigma=0.1, n_classes=None, embedding_init="random",
                 freeze_embeddings=False, loss_kind="categorical", lstm_mode="dense",
                 lstm_branch="final", peephole=False, embeddings=None,
                 oov_strategy="uniform", min_df=1, epochs=10, batch_size=128,
                 learning_rate=0.05, seed=0, threads=1):
        self.seq_len = seq_len
        self.emb_dim = emb_dim
        self.kernel_sizes = kernel_sizes
        self.filters_per_channel = filters_per_channel
        self.pool = pool
        self.lstm_units = lstm_units
        self.dropout_rate = dropout_rate
        self.noise_sigma = noise_sigma
        self.n_classes = n_classes
        self.embedding_init = embedding_init
        self.freeze_embeddings = freeze_embeddings
        self.loss_kind = loss_kind
        self.lstm_mode = lstm_mode
        self.lstm_branch = lstm_branch
        self.peephole = peephole
        self.embeddings = embeddings
        self.oov_strategy = oov_strategy
        self.min_df = min_df
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.seed = seed
        self.threads = threads

    def _make_config(self, n_classes: int) -> ConvLstmConfig:
        return ConvLstmConfig(
            seq_len=self.seq_len, emb_dim=self.emb_dim,
            kernel_sizes=tuple(self.kernel_sizes),
            filters_per_channel=self.filters_per_channel, pool=self.pool,
            lstm_units=self.lstm_units, dropout_rate=self.dropout_rate,
            noise_sigma=self.noise_sigma, n_classes=n_classes,
            embedding_init=self.embedding_init,
            freeze_embeddings=self.freeze_embeddings, loss_kind=self.loss_kind,
            lstm_mode=self.lstm_mode, lstm_branch=self.lstm_branch,
            peephole=self.peephole,
        )

    def _encode(self, docs) -> np.ndarray:
        return np.stack([
            encode_document(_tokens_of(doc), self.vocab_, self.seq_len) for doc in docs
        ])

    def fit(self, docs, labels, valid=None):
        labels = list(labels)
        self.classes_ = sorted(set(labels))
        n_classes = self.n_classes or len(self.classes_)
        if len(self.classes_) < 2:
            raise ValueError("training set has a single class")
        self.vocab_ = build_vocabulary([_as_doc(d) for d in docs], min_df=self.min_df)
        self.config_ = self._make_config(n_classes)
        self.network_ = ConvLstmNetwork(
            self.config_, len(self.vocab_), seed=self.seed,
            embeddings=self.embeddings, vocab=self.vocab_,
            oov_strategy=self.oov_strategy,
        )
        train_ids = self._encode(docs)
        train_labels = np.array([self.classes_.index(l) for l in labels])
        valid_data = None
        if valid is not None:
            v_docs, v_labels = valid
            valid_data = (
                self._encode(v_docs),
                np.array([self.classes_.index(l) for l in v_labels]),
            )
        self.history_ = train_network(
            self.network_, (train_ids, train_labels), valid_data,
            epochs=self.epochs, batch_size=self.batch_size,
            learning_rate=self.learning_rate, seed=self.seed, threads=self.threads,
        )
        return self

    def predict_proba(self, docs) -> np.ndarray:
        return predict_proba(self.network_, self._encode(docs))

    def predict(self, docs) -> list:
        probs = self.predict_proba(docs)
        return [self.classes_[i] for i in np.argmax(probs, axis=1)]

    def save(self, directory) -> None:
        directory = Path(directory)
        nn.save_checkpoint(directory, self.network_.all_arrays(), meta={
            "seed": self.seed, "peephole": self.peephole,
        })
        tokens = self.vocab_.tokens
        vocab_hash = hashlib.sha256("\n".join(tokens).encode("utf-8")).hexdigest()
        sidecar = {
            "model_type": "convlstm",
            "config": asdict(self.config_),
            "classes": self.classes_,
            "vocabulary": tokens,
            "vocabulary_sha256": vocab_hash,
            "embedding_provenance": (
                {"kind": self.embeddings.kind, "dim": self.embeddings.dim}
                if isinstance(self.embeddings, EmbeddingModel) else None
            ),
            "train": {
                "epochs": self.epochs, "batch_size": self.batch_size,
                "learning_rate": self.learning_rate, "seed": self.seed,
            },
        }
        (directory / "model.json").write_text(
            json.dumps(sidecar, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, directory) -> "ConvLstmClassifier":
        directory = Path(directory)
        sidecar = json.loads((directory / "model.json").read_text(encoding="utf-8"))
        arrays, _ = nn.load_checkpoint(directory)
        cfg_dict = sidecar["config"]
        cfg_dict["kernel_sizes"] = tuple(cfg_dict["kernel_sizes"])
        cfg = ConvLstmConfig(**cfg_dict)
        tokens = sidecar["vocabulary"]
        vocab = Vocabulary(tokens, {t: len(tokens) - i for i, t in enumerate(tokens)},
                           {t: 1 for t in tokens})
        est = cls(**{**{k: v for k, v in cfg_dict.items() if k != "n_classes"},
                     "n_classes": cfg.n_classes,
                     "seed": sidecar["train"]["seed"],
                     "epochs": sidecar["train"]["epochs"],
                     "batch_size": sidecar["train"]["batch_size"],
                     "learning_rate": sidecar["train"]["learning_rate"]})
        est.classes_ = sidecar["classes"]
        est.vocab_ = vocab
        est.config_ = cfg
        # checkpointed weights replace any init, so build the graph randomly
        # even if the original run started from pretrained vectors
        build_cfg = ConvLstmConfig(**{**cfg_dict, "embedding_init": "random"})
        net = ConvLstmNetwork(build_cfg, len(vocab), seed=sidecar["train"]["seed"])
        for name, tensor in [("embedding", net.embedding), ("head_w", net.head_w),
                             ("head_b", net.head_b)]:
            tensor.data[...] = arrays[name]
        for idx, (ksize, kernels, bias) in enumerate(net.channels):
            kernels.data[...] = arrays[f"conv{idx}_k{ksize}_kernels"]
            bias.data[...] = arrays[f"conv{idx}_k{ksize}_bias"]
        for name, tensor in net.lstm.tensors().items():
            tensor.data[...] = arrays[f"lstm_{name}"]
        est.network_ = net
        return est


def _tokens_of(doc):
    return doc.tokens if hasattr(doc, "tokens") else doc


def _as_doc(doc):
    if hasattr(doc, "tokens"):
        return doc
    from .pipeline import TokenizedDocument

    return TokenizedDocument(id="", tokens=tuple(doc), label=None)


# -- TF-IDF features and baselines -------------------------------------------


class TfidfFeaturizer(ParamsMixin):
    """Character n-gram and word unigram counts with smoothed idf weighting.

    idf = ln((1 + N) / (1 + df)) + 1; rows are L2-normalized; the feature
    index is the sorted list of feature strings, so it is deterministic.
    """

    def __init__(self, char_ngram_range=(2, 4), word_unigrams=True):
        self.char_ngram_range = char_ngram_range
        self.word_unigrams = word_unigrams

    def _doc_features(self, doc) -> dict:
        tokens = list(_tokens_of(doc))
        counts: dict[str, int] = {}
        if self.word_unigrams:
            for token in tokens:
                key = f"w:{token}"
                counts[key] = counts.get(key, 0) + 1
        if self.char_ngram_range:
            lo, hi = self.char_ngram_range
            text = " ".join(tokens)
            for n in range(lo, hi + 1):
                for start in range(0, len(text) - n + 1):
                    key = f"c:{text[start:start + n]}"
                    counts[key] = counts.get(key, 0) + 1
        return counts

    def fit(self, docs, y=None):
        docs = list(docs)
        if not docs:
            raise ValueError("cannot fit on an empty corpus")
        df: dict[str, int] = {}
        for doc in docs:
            for feature in self._doc_features(doc):
                df[feature] = df.get(feature, 0) + 1
        self.feature_names_ = sorted(df)
        self.feature_index_ = {f: i for i, f in enumerate(self.feature_names_)}
        n = len(docs)
        self.idf_ = np.array(
            [np.log((1.0 + n) / (1.0 + df[f])) + 1.0 for f in self.feature_names_],
            dtype=np.float64,
        )
        return self

    def transform(self, docs) -> sp.csr_matrix:
        docs = list(docs)
        rows, cols, vals = [], [], []
        for r, doc in enumerate(docs):
            counts = self._doc_features(doc)
            for feature, count in counts.items():
                c = self.feature_index_.get(feature)
                if c is not None:
                    rows.append(r)
                    cols.append(c)
                    vals.append(count * self.idf_[c])
        matrix = sp.csr_matrix(
            (vals, (rows, cols)), shape=(len(docs), len(self.feature_names_))
        )
        norms = np.sqrt(matrix.multiply(matrix).sum(axis=1)).A.ravel()
        norms[norms == 0.0] = 1.0
        inv = sp.diags(1.0 / norms)
        return inv @ matrix

    def fit_transform(self, docs, y=None):
        self.fit(docs)
        return self.transform(docs)


def tfidf_features(docs, char_ngram_range=(2, 4), word_unigrams=True) -> sp.csr_matrix:
    return TfidfFeaturizer(char_ngram_range, word_unigrams).fit_transform(list(docs))


class _LogisticRegressionGD(ParamsMixin):
    """Multinomial logistic regression by full-batch gradient descent."""

    def __init__(self, l2=1e-4, learning_rate=0.5, epochs=300, seed=0):
        self.l2 = l2
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.seed = seed

    def fit(self, X, y):
        y = np.asarray(y)
        self.classes_ = sorted(set(y.tolist()))
        if len(self.classes_) < 2:
            raise ValueError("logistic regression needs at least two classes")
        n, d = X.shape
        c = len(self.classes_)
        idx = np.array([self.classes_.index(label) for label in y])
        target = np.zeros((n, c))
        target[np.arange(n), idx] = 1.0
        self.weights_ = np.zeros((d, c))
        self.bias_ = np.zeros(c)
        for _ in range(self.epochs):
            logits = X @ self.weights_ + self.bias_
            logits -= logits.max(axis=1, keepdims=True)
            e = np.exp(logits)
            probs = e / e.sum(axis=1, keepdims=True)
            delta = (probs - target) / n
            grad_w = X.T @ delta + self.l2 * self.weights_
            grad_b = delta.sum(axis=0)
            self.weights_ -= self.learning_rate * grad_w
            self.bias_ -= self.learning_rate * grad_b
        return self

    def predict_proba(self, X):
        logits = X @ self.weights_ + self.bias_
        logits -= logits.max(axis=1, keepdims=True)
        e = np.exp(logits)
        return e / e.sum(axis=1, keepdims=True)


class _MultinomialNaiveBayes(ParamsMixin):
    """Count-based class conditionals with additive smoothing."""

    def __init__(self, alpha=1.0):
        self.alpha = alpha

    def fit(self, X, y):
        y = np.asarray(y)
        self.classes_ = sorted(set(y.tolist()))
        if len(self.classes_) < 2:
            raise ValueError("naive Bayes needs at least two classes")
        n, d = X.shape
        X = sp.csr_matrix(X)
        self.log_prior_ = np.zeros(len(self.classes_))
        self.log_likelihood_ = np.zeros((len(self.classes_), d))
        for ci, cls in enumerate(self.classes_):
            mask = y == cls
            self.log_prior_[ci] = np.log(mask.sum() / n)
            counts = np.asarray(X[mask].sum(axis=0)).ravel() + self.alpha
            self.log_likelihood_[ci] = np.log(counts / counts.sum())
        return self

    def predict_proba(self, X):
        joint = sp.csr_matrix(X) @ self.log_likelihood_.T + self.log_prior_
        joint -= joint.max(axis=1, keepdims=True)
        e = np.exp(joint)
        return e / e.sum(axis=1, keepdims=True)


class _CosineKnn(ParamsMixin):
    """Instance store scored by cosine similarity; probabilities are
    neighbor vote fractions."""

    def __init__(self, k=5):
        self.k = k

    def fit(self, X, y):
        X = sp.csr_matrix(X)
        norms = np.sqrt(X.multiply(X).sum(axis=1)).A.ravel()
        norms[norms == 0.0] = 1.0
        self.train_ = sp.diags(1.0 / norms) @ X
        self.labels_ = np.asarray(y)
        self.classes_ = sorted(set(self.labels_.tolist()))
        return self

    def predict_proba(self, X):
        X = sp.csr_matrix(X)
        norms = np.sqrt(X.multiply(X).sum(axis=1)).A.ravel()
        norms[norms == 0.0] = 1.0
        Xn = sp.diags(1.0 / norms) @ X
        sims = (Xn @ self.train_.T).toarray()
        k = min(self.k, sims.shape[1])
        out = np.zeros((X.shape[0], len(self.classes_)))
        for r in range(sims.shape[0]):
            # stable sort keeps the earliest instance on ties
            order = np.argsort(-sims[r], kind="stable")[:k]
            for idx in order:
                out[r, self.classes_.index(self.labels_[idx])] += 1.0
        return out / k


_BASELINES = {
    "logreg": _LogisticRegressionGD,
    "multinomial_nb": _MultinomialNaiveBayes,
    "knn": _CosineKnn,
}


@dataclass
class BaselineModel:
    kind: str
    model: object
    feature_config: dict = field(default_factory=dict)

    def predict_proba(self, X):
        return self.model.predict_proba(X)

    @property
    def classes_(self):
        return self.model.classes_


def train_baseline(features, labels, kind: str, **kwargs) -> BaselineModel:
    if kind not in _BASELINES:
        raise ValueError(f"unknown baseline kind {kind!r}; known: {sorted(_BASELINES)}")
    model = _BASELINES[kind](**kwargs).fit(features, labels)
    return BaselineModel(kind=kind, model=model)


class TfidfClassifier(ParamsMixin):
    """TF-IDF features piped into one of the baseline models."""

    def __init__(self, kind="logreg", char_ngram_range=(2, 4), word_unigrams=True,
                 k=5, alpha=1.0, l2=1e-4, learning_rate=0.5, epochs=300, seed=0):
        self.kind = kind
        self.char_ngram_range = char_ngram_range
        self.word_unigrams = word_unigrams
        self.k = k
        self.alpha = alpha
        self.l2 = l2
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.seed = seed

    def fit(self, docs, labels, valid=None):
        self.featurizer_ = TfidfFeaturizer(self.char_ngram_range, self.word_unigrams)
        X = self.featurizer_.fit_transform(list(docs))
        kwargs = {}
        if self.kind == "knn":
            kwargs = {"k": self.k}
        elif self.kind == "multinomial_nb":
            kwargs = {"alpha": self.alpha}
        elif self.kind == "logreg":
            kwargs = {"l2": self.l2, "learning_rate": self.learning_rate,
                      "epochs": self.epochs, "seed": self.seed}
        self.baseline_ = train_baseline(X, list(labels), self.kind, **kwargs)
        self.classes_ = self.baseline_.classes_
        return self

    def predict_proba(self, docs):
        return self.baseline_.predict_proba(self.featurizer_.transform(list(docs)))

    def predict(self, docs):
        probs = self.predict_proba(docs)
        return [self.classes_[i] for i in np.argmax(probs, axis=1)]

    def save(self, directory) -> None:
        directory = Path(directory)
        model = self.baseline_.model
        arrays = {"idf": self.featurizer_.idf_.astype(np.float32)}
        if self.kind == "logreg":
            arrays["weights"] = model.weights_.astype(np.float32)
            arrays["bias"] = model.bias_.astype(np.float32)
        elif self.kind == "multinomial_nb":
            arrays["log_prior"] = model.log_prior_.astype(np.float32)
            arrays["log_likelihood"] = model.log_likelihood_.astype(np.float32)
        else:
            arrays["train_matrix"] = model.train_.toarray().astype(np.float32)
        nn.save_checkpoint(directory, arrays, meta={"seed": self.seed})
        sidecar = {
            "model_type": "tfidf",
            "params": {k: list(v) if isinstance(v, tuple) else v
                       for k, v in self.get_params().items()},
            "classes": list(self.classes_),
            "feature_names": self.featurizer_.feature_names_,
        }
        if self.kind == "knn":
            sidecar["train_labels"] = [str(l) for l in self.baseline_.model.labels_]
        (directory / "model.json").write_text(
            json.dumps(sidecar, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, directory) -> "TfidfClassifier":
        directory = Path(directory)
        sidecar = json.loads((directory / "model.json").read_text(encoding="utf-8"))
        arrays, _ = nn.load_checkpoint(directory)
        params = dict(sidecar["params"])
        params["char_ngram_range"] = tuple(params["char_ngram_range"])
        est = cls(**params)
        est.featurizer_ = TfidfFeaturizer(est.char_ngram_range, est.word_unigrams)
        est.featurizer_.feature_names_ = sidecar["feature_names"]
        est.featurizer_.feature_index_ = {
            f: i for i, f in enumerate(sidecar["feature_names"])
        }
        est.featurizer_.idf_ = arrays["idf"].astype(np.float64)
        est.classes_ = sidecar["classes"]
        if est.kind == "logreg":
            model = _LogisticRegressionGD(l2=est.l2, learning_rate=est.learning_rate,
                                          epochs=est.epochs, seed=est.seed)
            model.classes_ = est.classes_
            model.weights_ = arrays["weights"].astype(np.float64)
            model.bias_ = arrays["bias"].astype(np.float64)
        elif est.kind == "multinomial_nb":
            model = _MultinomialNaiveBayes(alpha=est.alpha)
            model.classes_ = est.classes_
            model.log_prior_ = arrays["log_prior"].astype(np.float64)
            model.log_likelihood_ = arrays["log_likelihood"].astype(np.float64)
        else:
            model = _CosineKnn(k=est.k)
            model.classes_ = est.classes_
            model.train_ = sp.csr_matrix(arrays["train_matrix"].astype(np.float64))
            model.labels_ = np.array(sidecar["train_labels"])
        est.baseline_ = BaselineModel(kind=est.kind, model=model)
        return est


def load_classifier(directory):
    """Dispatch on the sidecar's model_type to rebuild a saved classifier."""
    sidecar = json.loads((Path(directory) / "model.json").read_text(encoding="utf-8"))
    model_type = sidecar.get("model_type")
    if model_type == "convlstm":
        return ConvLstmClassifier.load(directory)
    if model_type == "fasttext":
        return FastTextClassifier.load(directory)
    if model_type == "tfidf":
        return TfidfClassifier.load(directory)
    raise ValueError(f"unknown model_type {model_type!r} in {directory}")


# -- averaged bag-of-features linear classifier ---------------------------


def fasttext_doc_loss_and_grads(feature_rows, projection, label_index):
    """Loss and gradients for one document of the linear classifier.

    The document representation is the mean of its feature rows; the
    projection maps it to pre-softmax scores.  Returns (loss, d_rows,
    d_projection).
    """
    feature_rows = np.asarray(feature_rows)
    projection = np.asarray(projection)
    h = feature_rows.mean(axis=0)
    logits = h @ projection
    logits = logits - logits.max()
    e = np.exp(logits)
    probs = e / e.sum()
    loss = -np.log(max(probs[label_index], 1e-12))
    dz = probs.copy()
    dz[label_index] -= 1.0
    d_projection = np.outer(h, dz)
    dh = projection @ dz
    d_rows = np.repeat((dh / feature_rows.shape[0])[None, :], feature_rows.shape[0], axis=0)
    return float(loss), d_rows, d_projection


class FastTextClassifier(ParamsMixin):
    """Linear classifier over averaged word and subword-bucket embeddings."""

    def __init__(self, dim=50, epochs=20, learning_rate=0.1, min_df=1,
                 nmin=3, nmax=6, bucket_count=2**12, use_subword=True, seed=0):
        self.dim = dim
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.min_df = min_df
        self.nmin = nmin
        self.nmax = nmax
        self.bucket_count = bucket_count
        self.use_subword = use_subword
        self.seed = seed

    def _feature_ids(self, tokens) -> np.ndarray:
        ids = []
        offset = len(self.vocab_) + 1
        for token in tokens:
            wid = self.vocab_.token_to_id.get(token)
            if wid is not None:
                ids.append(wid)
            if self.use_subword:
                ids.extend(
                    offset + b
                    for b in subword_ngrams(token, self.nmin, self.nmax, self.bucket_count)
                )
        if not ids:
            ids = [0]
        return np.array(ids, dtype=np.int64)

    def fit(self, docs, labels, valid=None):
        docs = list(docs)
        labels = list(labels)
        if not docs:
            raise ValueError("training set is empty")
        self.classes_ = sorted(set(labels))
        self.vocab_ = getattr(self, "vocab_override_", None) or build_vocabulary(
            [_as_doc(d) for d in docs], min_df=self.min_df
        )
        rng = check_random_state(self.seed)
        n_rows = len(self.vocab_) + 1 + (self.bucket_count if self.use_subword else 0)
        self.lookup_ = rng.uniform(-1.0 / self.dim, 1.0 / self.dim,
                                   size=(n_rows, self.dim)).astype(np.float64)
        self.lookup_[0] = 0.0
        self.projection_ = np.zeros((self.dim, len(self.classes_)), dtype=np.float64)
        acc_lookup = np.full_like(self.lookup_, 1e-8)
        acc_proj = np.full_like(self.projection_, 1e-8)
        encoded = [self._feature_ids(_tokens_of(d)) for d in docs]
        y = np.array([self.classes_.index(l) for l in labels])
        order_rng = check_random_state(derive_seed(self.seed, "order"))
        lr = self.learning_rate
        self.epoch_losses_ = []
        for _ in range(self.epochs):
            order = order_rng.permutation(len(docs))
            total = 0.0
            for i in order:
                ids = encoded[i]
                loss, d_rows, d_proj = fasttext_doc_loss_and_grads(
                    self.lookup_[ids], self.projection_, y[i]
                )
                total += loss
                acc_proj += d_proj * d_proj
                self.projection_ -= lr * d_proj / np.sqrt(acc_proj)
                sq = d_rows[0] * d_rows[0]
                for row in ids:
                    acc_lookup[row] += sq
                    self.lookup_[row] -= lr * d_rows[0] / np.sqrt(acc_lookup[row])
            self.epoch_losses_.append(total / len(docs))
        return self

    def predict_proba(self, docs) -> np.ndarray:
        docs = list(docs)
        out = np.zeros((len(docs), len(self.classes_)))
        for r, doc in enumerate(docs):
            ids = self._feature_ids(_tokens_of(doc))
            h = self.lookup_[ids].mean(axis=0)
            logits = h @ self.projection_
            logits -= logits.max()
            e = np.exp(logits)
            out[r] = e / e.sum()
        return out

    def predict(self, docs) -> list:
        probs = self.predict_proba(docs)
        return [self.classes_[i] for i in np.argmax(probs, axis=1)]

    def save(self, directory) -> None:
        directory = Path(directory)
        nn.save_checkpoint(directory, {
            "lookup": self.lookup_, "projection": self.projection_,
        }, meta={"seed": self.seed})
        sidecar = {
            "model_type": "fasttext",
            "params": self.get_params(),
            "classes": self.classes_,
            "vocabulary": self.vocab_.tokens,
        }
        (directory / "model.json").write_text(
            json.dumps(sidecar, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, directory) -> "FastTextClassifier":
        directory = Path(directory)
        sidecar = json.loads((directory / "model.json").read_text(encoding="utf-8"))
        arrays, _ = nn.load_checkpoint(directory)
        est = cls(**sidecar["params"])
        est.classes_ = sidecar["classes"]
        tokens = sidecar["vocabulary"]
        est.vocab_ = Vocabulary(tokens, {t: len(tokens) - i for i, t in enumerate(tokens)},
                                {t: 1 for t in tokens})
        est.lookup_ = arrays["lookup"].astype(np.float64)
        est.projection_ = arrays["projection"].astype(np.float64)
        return est


def fasttext_linear_classifier(docs, vocab: Vocabulary, spec: TrainSpec,
                               labels=None) -> FastTextClassifier:
    """Fit the averaged-embedding linear classifier from a TrainSpec.

    Labels default to the documents' own labels.
    """
    docs = list(docs)
    if labels is None:
        labels = [d.label for d in docs]
    clf = FastTextClassifier(
        dim=spec.dim, epochs=spec.epochs, learning_rate=spec.learning_rate,
        nmin=spec.nmin, nmax=spec.nmax, bucket_count=spec.bucket_count, seed=spec.seed,
    )
    clf.vocab_override_ = vocab
    return clf.fit(docs, labels)


# -- ensembling -------------------------------------------------------------


def ensemble_average(models: Sequence, docs) -> np.ndarray:
    """Arithmetic mean of member predicted distributions."""
    models = list(models)
    if not models:
        raise ValueError("ensemble needs at least one model")
    stacked = [np.asarray(m.predict_proba(docs)) for m in models]
    first = stacked[0]
    for other in stacked[1:]:
        if other.shape != first.shape:
            raise ValueError("ensemble members disagree on the class set")
    return np.mean(stacked, axis=0)


def ensemble_predict(models: Sequence, docs, classes) -> list:
    """Argmax of the averaged distribution; ties pick the lowest index."""
    probs = ensemble_average(models, docs)
    return [classes[i] for i in np.argmax(probs, axis=1)]
