"""textclf: word embeddings, a multichannel convolutional-LSTM text
classifier, linear baselines, and an evaluation harness in plain numpy.
"""

from .pipeline import (
    RawDocument,
    TokenizedDocument,
    PipelineConfig,
    TextPipeline,
    apply_pipeline,
    prune_infrequent,
    preprocess_corpus,
)
from .corpus import (
    Vocabulary,
    LabeledDataset,
    FoldAssignment,
    build_vocabulary,
    encode_document,
    stratified_kfold,
    zipf_fit,
    generate_synthetic_corpus,
)
from .embeddings import (
    TrainSpec,
    EmbeddingModel,
    SkipGramEmbedding,
    GloveEmbedding,
    SubwordEmbedding,
    train_sgns,
    train_glove,
    train_subword_sgns,
    vector,
    nearest_neighbors,
    save_word_vectors,
    load_word_vectors,
)
from .model import (
    ConvLstmConfig,
    ConvLstmClassifier,
    FastTextClassifier,
    TfidfClassifier,
    TfidfFeaturizer,
    tfidf_features,
    train_baseline,
    ensemble_average,
)
from .eval import (
    EvalReport,
    confusion_matrix,
    macro_prf,
    mcc,
    roc_auc,
    calibration_curve,
    cross_validate,
    learning_curve,
    random_search,
)

__version__ = "0.1.0"
