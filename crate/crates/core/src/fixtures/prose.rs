//! Sentence pools for synthetic papers. Nothing here may contain digits,
//! metric names, dataset names or citation-like patterns: the generator adds
//! every extractable item itself.

use super::Theme;

pub(super) struct ThemeProse {
    pub title_heads: &'static [&'static str],
    pub title_cores: &'static [&'static str],
    /// First abstract sentence; carries the screening keyword.
    pub openers: &'static [&'static str],
    pub middles: &'static [&'static str],
    pub filler: &'static [&'static str],
}

pub(super) const TITLE_TAILS: &[&str] = &[
    "Revisited",
    "at Modest Scale",
    "with Fewer Tricks",
    "for Long Contexts",
    "under a Fixed Budget",
    "in Practice",
    "on a Single Accelerator",
    "Made Simple",
    "for Streaming Input",
    "from Scratch",
    "with Shared Embeddings",
    "beyond the Baseline",
];

pub(super) const CLOSERS: &[&str] = &[
    "We release the full training configuration so the comparison is easy to repeat.",
    "The resulting recipe is short and carries over to new corpora.",
    "Ablations attribute most of the gain to two simple changes.",
    "Our findings suggest that tuning matters more than novelty here.",
];

const RECURRENT: ThemeProse = ThemeProse {
    title_heads: &["Regularised", "Gated", "Tied", "Averaged", "Variational", "Weight-Dropped", "Stacked", "Cached", "Residual", "Narrow", "Wide", "Frugal"],
    title_cores: &["Recurrent Language Models", "LSTM Language Models", "Recurrent Word Predictors", "Character-Aware Recurrent Models"],
    openers: &[
        "We study recurrent language models trained with aggressive regularisation.",
        "This paper examines gated recurrent networks used as autoregressive language models.",
        "We revisit word-level language modelling with stacked recurrent networks.",
    ],
    middles: &[
        "Dropout on hidden connections and averaged weight updates both matter for generalisation.",
        "A careful schedule for the step size matters more than extra depth.",
        "Tying the input and output embeddings saves memory without hurting quality.",
        "Longer truncated backpropagation windows help on corpora with long documents.",
    ],
    filler: &[
        "Recurrent cells carry a compact summary of the prefix from one token to the next.",
        "Gates decide how much of the previous state survives each update.",
        "Weight dropping perturbs the recurrent matrices instead of the activations.",
        "Averaging the iterates late in training smooths out noisy updates.",
        "Truncated backpropagation keeps memory use flat regardless of document length.",
        "Shared embedding matrices couple the input and output vocabularies.",
        "Small recurrent models remain competitive when regularised with care.",
        "The hidden state is reset only at document boundaries.",
    ],
};

const ATTENTION: ThemeProse = ThemeProse {
    title_heads: &["Segment-Recurrent", "Relative", "Deep", "Memory-Augmented", "Cached", "Adaptive", "Sparse", "Windowed", "Streaming", "Compressive", "Shallow", "Balanced"],
    title_cores: &["Transformer Language Models", "Attention Decoders", "Self-Attention Language Models", "Transformer Decoders"],
    openers: &[
        "We present an attention-based autoregressive language model with segment-level memory.",
        "This work scales self-attention decoders for autoregressive language modelling.",
        "We analyse relative position encodings in Transformer language models.",
    ],
    middles: &[
        "Caching hidden states from earlier segments extends the usable context.",
        "Multi-head attention lets each position mix information from distant tokens.",
        "Warm-up of the step size stabilises early training of deep decoders.",
        "Adaptive input representations reduce the cost of large vocabularies.",
    ],
    filler: &[
        "Self-attention compares every position with every earlier position in the window.",
        "Relative position terms let the model reuse cached states without confusion.",
        "Layer normalisation before each block keeps deep stacks trainable.",
        "The feed-forward sublayer widens the representation before projecting it back.",
        "Causal masking guarantees that no position can see the future.",
        "Memory from the previous segment is treated as a constant during the backward pass.",
        "Longer evaluation contexts help most on documents with recurring entities.",
        "Residual connections let gradients bypass individual attention blocks.",
    ],
};

const MUSIC: ThemeProse = ThemeProse {
    title_heads: &["Anticipatory", "Event-Based", "Polyphonic", "Expressive", "Controllable", "Infilling", "Arrival-Time", "Multitrack", "Symbolic", "Structured", "Conditional", "Timed"],
    title_cores: &["Music Transformers", "Music Sequence Models", "Performance Generators", "Score Generators"],
    openers: &[
        "We study autoregressive music generation over symbolic event sequences.",
        "This paper applies Transformer sequence models to polyphonic music generation.",
        "We model performance recordings as an autoregressive stream of timed events.",
    ],
    middles: &[
        "Notes, durations and velocities are encoded as discrete events.",
        "Anticipation of future control events enables infilling of partial scores.",
        "Listening tests favour samples with coherent long-range structure.",
        "Interleaving control tokens with notes keeps generation causal.",
    ],
    filler: &[
        "Each note is described by its onset, its duration, its pitch and its instrument.",
        "Arrival-time encodings avoid quantising expressive timing to a grid.",
        "Control events can be placed ahead of the notes they constrain.",
        "Sampling with a truncated distribution removes implausible pitch jumps.",
        "Drum tracks are modelled with the same vocabulary as melodic parts.",
        "Long pieces are split into overlapping windows for training.",
        "Generated continuations are judged by musicians without knowing their source.",
        "Transposition of whole pieces is a cheap and effective augmentation.",
    ],
};

const FORECASTING: ThemeProse = ThemeProse {
    title_heads: &["Seasonal", "Regional", "Robust", "Bayesian", "Rolling", "Hierarchical", "Sparse", "Threshold", "Shrinkage", "Smooth", "Local", "Adaptive"],
    title_cores: &["Autoregressive Rainfall Forecasts", "Autoregressive Demand Forecasting", "Autoregressive River Discharge Models", "Autoregressive Price Models"],
    openers: &[
        "We fit seasonal autoregressive models to daily rainfall records from upland stations.",
        "This study compares autoregressive moving-average forecasters for river discharge.",
        "We revisit vector autoregressive models for regional electricity demand.",
    ],
    middles: &[
        "Lag orders are selected with an information criterion on a rolling window.",
        "Exogenous weather covariates enter through a linear transfer function.",
        "Residual diagnostics reveal mild heteroscedasticity in the summer months.",
        "Forecast intervals are calibrated against a held-out season.",
    ],
    filler: &[
        "Station records were cleaned of obvious gauge failures before fitting.",
        "Seasonal differencing removes most of the annual cycle.",
        "The covariance of the innovations is estimated jointly across regions.",
        "Shrinkage toward a random walk guards against overfitting short series.",
        "Holiday effects enter as indicator variables.",
        "Forecast skill is compared against climatology and persistence.",
        "Rolling-origin evaluation mimics how forecasts are issued operationally.",
        "Parameter stability is checked with recursive residuals.",
    ],
};

const VISION: ThemeProse = ThemeProse {
    title_heads: &["Compact", "Lightweight", "Weakly Supervised", "Boundary-Aware", "Multi-Scale", "Efficient", "Robust", "Annotated", "Greenhouse", "Field-Ready", "Frugal", "Dense"],
    title_cores: &["Leaf Segmentation Networks", "Convolutional Plant Segmenters", "Crop Row Detectors", "Fruit Counting Networks"],
    openers: &[
        "We segment leaves in greenhouse photographs with a compact convolutional network.",
        "This work detects crop rows in aerial imagery under changing illumination.",
        "We count fruit in orchard images with weak point annotations.",
    ],
    middles: &[
        "Boundary refinement improves masks where leaves overlap.",
        "Colour jitter and random crops make the detector robust to lighting.",
        "A small decoder recovers detail lost by early downsampling.",
        "Annotators label a single point per object instead of full masks.",
    ],
    filler: &[
        "Images were captured at several times of day to vary the lighting.",
        "Masks were drawn by two annotators and reconciled by a third.",
        "Skip connections carry fine detail from the encoder to the decoder.",
        "Thin stems are the most common source of segmentation errors.",
        "Test plots were kept separate from training plots to avoid leakage.",
        "Predicted masks are post-processed with a morphological opening.",
        "The network runs on a field laptop without a dedicated accelerator.",
        "Occluded fruit are counted from partial evidence in neighbouring frames.",
    ],
};

pub(super) fn prose(theme: Theme) -> &'static ThemeProse {
    match theme {
        Theme::Recurrent => &RECURRENT,
        Theme::Attention => &ATTENTION,
        Theme::Music => &MUSIC,
        Theme::Forecasting => &FORECASTING,
        Theme::Vision => &VISION,
    }
}

pub(super) const GENERAL_FILLER: &[&str] = &[
    "Reproducing published numbers often depends on details that papers leave implicit.",
    "We keep the evaluation protocol fixed across all compared systems.",
    "Every reported configuration was trained from a fresh initialisation.",
    "Training curves are smooth once the schedule is set sensibly.",
    "We describe the remaining design choices in the appendix.",
    "Code and configuration files accompany this paper.",
    "Hyperparameters not mentioned here follow common practice.",
    "Differences between runs are small compared with differences between methods.",
    "The main text focuses on the settings that changed the outcome.",
    "Preprocessing follows the standard release of each corpus.",
];

/// Claim sentences for citations. `{cite}` is replaced by a parenthetical
/// marker; `{narr}` by a narrative one.
pub(super) const CITATION_CLAIMS: &[&str] = &[
    "Gated recurrence remained a strong baseline for a long time {cite}.",
    "Regularising recurrent weights directly was proposed earlier {cite}.",
    "Attention over cached states extends the effective context {cite}.",
    "Event vocabularies for symbolic music were refined over several years {cite}.",
    "Careful schedules often matter more than architecture changes {cite}.",
    "Several groups reported instabilities when training very deep decoders {cite}.",
    "{narr} showed that simple averaging of weights improves generalisation.",
    "{narr} argued that evaluation protocols differ more than is usually admitted.",
    "{narr} introduced a relative encoding of positions.",
    "{narr} described an inexpensive way to reuse hidden states across windows.",
];

/// Related-work sentences that report a baseline's setting (not a planted
/// fact). `{narr}` is a narrative citation, `{v}` the value.
pub(super) const BASELINE_HYPERPARAMS: &[(&str, &str, &[f64])] = &[
    ("dropout", "{narr} trained a comparable model with a dropout of {v}.", &[0.2, 0.5, 0.6]),
    ("learning_rate", "{narr} report a learning rate of {v} for their baseline.", &[0.003, 0.002, 0.01]),
    ("batch_size", "{narr} used a batch size of {v} in their runs.", &[16.0, 128.0, 256.0]),
];

pub(super) const BASELINE_RESULT: &str = "{narr} obtained a perplexity of {v} on {dataset}.";

/// Numbers next to words that are neither metrics nor settings.
pub(super) const DISTRACTORS: &[&str] = &[
    "The annotation effort took {n} weeks and involved {m} volunteers.",
    "Our shared cluster has {n} nodes, of which {m} were free most days.",
    "Each configuration was rerun on {n} separate days.",
    "The released archive contains {n} files in {m} folders.",
    "We discarded {n} documents that were duplicated in the crawl.",
];

/// Settings phrased in ways the shipped rules do not recognise.
pub(super) fn hard_phrasing(name: &str) -> Option<&'static str> {
    Some(match name {
        "learning_rate" => "The step size of the optimiser starts at {v}.",
        "dropout" => "Units are zeroed with probability {v} while fitting.",
        "batch_size" => "Each update averages gradients over {v} sequences.",
        "epochs" => "Fitting continues for {v} full passes over the corpus.",
        "hidden_size" => "Each recurrent block carries {v} units of state.",
        "grad_clip" => "Gradient norms are capped at {v}.",
        "optimizer" => "Parameters are updated with {v} throughout.",
        "seq_length" => "Inputs are cut into windows of {v} tokens.",
        "steps" => "Optimisation stops after {v} parameter updates.",
        "vocab_size" => "The token inventory holds {v} symbols.",
        "embed_size" => "Words are mapped to vectors with {v} coordinates.",
        _ => return None,
    })
}

/// Rule-recognised phrasings, one or more per setting.
pub(super) fn phrasings(name: &str) -> &'static [&'static str] {
    match name {
        "learning_rate" => &[
            "We use a learning rate of {v}.",
            "The initial learning rate is set to {v}.",
            "Optimisation starts from lr = {v}.",
            "Training uses learning rate {v} with a short warmup.",
        ],
        "num_layers" => &["The network stacks {v} layers.", "The decoder has {v} layers."],
        "hidden_size" => &["Each layer has a hidden size of {v}.", "The hidden state dimension is {v}."],
        "embed_size" => &["We use an embedding size of {v}.", "Tokens are mapped to {v}-dimensional embeddings."],
        "dropout" => &["A dropout rate of {v} is applied between blocks.", "We apply dropout of {v} to the outputs.", "We use dropout {v} on the residual branches."],
        "dropout_emb" => &["An embedding dropout of {v} is used."],
        "weight_decay" => &["We add a weight decay of {v}."],
        "optimizer" => &["Training uses the {v} optimizer.", "All runs use the {v} optimizer."],
        "batch_size" => &["Updates use a batch size of {v}.", "We train on mini-batches of {v} sequences.", "Runs use batch size {v} throughout."],
        "seq_length" => &["Inputs have a sequence length of {v}.", "We use a BPTT length of {v}."],
        "mem_length" => &["A memory length of {v} is used during training.", "The recurrence length is {v}."],
        "grad_clip" => &["We use gradient clipping at {v}.", "We clip gradients at {v}."],
        "epochs" => &["We train for {v} epochs.", "Each model sees {v} training epochs."],
        "steps" => &["Training runs for {v} steps.", "We stop after {v} training steps."],
        "vocab_size" => &["The model uses a vocabulary of {v} tokens.", "Events come from a {v}-event vocabulary."],
        "param_count" => &["The model has {v} parameters.", "Our largest variant has {v} trainable parameters."],
        "num_heads" => &["Each block uses {v} attention heads.", "Attention is split into {v} heads."],
        _ => &[],
    }
}

/// `{n}-layer {arch}` renders depth and architecture together.
pub(super) const DEPTH_WITH_ARCH: &[&str] = &["The model is a {n}-layer {arch}.", "We train a {n}-layer {arch} on this data."];
pub(super) const HARD_DEPTH_WITH_ARCH: &str = "The encoder stacks {n} {arch} blocks.";
pub(super) const HIDDEN_LIST: &str = "The layers use hidden sizes of {v}.";

pub(super) const RESULT_FORMS: &[&str] = &[
    "The model reaches a {split}{metric} of {v} on {dataset}.",
    "On {dataset}, we measure a {split}{metric} of {v}.",
];
pub(super) const RESULT_FORM_NO_DATASET: &str = "The model reaches a {split}{metric} of {v} on held-out material.";
pub(super) const HARD_RESULT: &str = "Our model scores {v} in terms of {metric} on {dataset}.";

pub(super) const SURNAMES: &[&str] = &[
    "Quill", "Oster", "Ruiz", "Marlowe", "Tanaka", "Okafor", "Lindqvist", "Berrada", "Varga", "Hollis", "Anand",
    "Castell", "Dimitrov", "Eklund", "Farrow", "Gatti", "Haddad", "Iversen", "Jovic", "Kerrigan", "Laine",
    "Moreau", "Nakamura", "Osei", "Pellegrini", "Rasmussen", "Sauer", "Thorne", "Ueda", "Vasquez", "Wendt",
    "Yilmaz", "Zeller", "Abara", "Brandt", "Corvin", "Delacroix", "Espino", "Fennimore", "Grau",
];
pub(super) const GIVEN_NAMES: &[&str] = &[
    "Ada", "Bram", "Cleo", "Dario", "Esme", "Femi", "Greta", "Hugo", "Ines", "Jonas", "Kaia", "Luca", "Mina",
    "Nils", "Olga", "Pavel", "Rosa", "Soren", "Tala", "Umar",
];
pub(super) const REF_TITLE_WORDS: &[&str] = &[
    "Regularising", "Sequence", "Models", "Attention", "Memory", "Recurrent", "Networks", "Music", "Events",
    "Language", "Structure", "Scaling", "Averaging", "Decoders", "Context", "Learning", "Tokens", "Windows",
];
pub(super) const VENUES: &[&str] = &[
    "Workshop on Sequence Learning",
    "Journal of Machine Learning Practice",
    "Conference on Representation Learning",
    "Symposium on Music Information Processing",
    "Transactions on Language Modelling",
];
