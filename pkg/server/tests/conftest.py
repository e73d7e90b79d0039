import pytest

VOCAB_WORDS = [
    "the", "cat", "sat", "on", "mat", "dog", "ran", "park", "a", "bird",
]


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    """Build a small random-weight masked LM with a word-level tokenizer.

    Constructed locally so the suite runs without network access; weights are
    seeded, saved once, and reloaded by every test, which keeps inference
    deterministic across processes.
    """
    import torch
    from tokenizers import Tokenizer, models, pre_tokenizers
    from transformers import (
        PreTrainedTokenizerFast,
        RobertaConfig,
        RobertaForMaskedLM,
    )

    vocab = {"<s>": 0, "</s>": 1, "<pad>": 2, "<unk>": 3, "<mask>": 4}
    for word in VOCAB_WORDS:
        vocab[word] = len(vocab)
    tokenizer = Tokenizer(models.WordLevel(vocab, unk_token="<unk>"))
    tokenizer.pre_tokenizer = pre_tokenizers.WhitespaceSplit()
    fast = PreTrainedTokenizerFast(
        tokenizer_object=tokenizer,
        bos_token="<s>",
        eos_token="</s>",
        pad_token="<pad>",
        unk_token="<unk>",
        mask_token="<mask>",
    )
    config = RobertaConfig(
        vocab_size=len(vocab),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=64,
    )
    torch.manual_seed(7)
    model = RobertaForMaskedLM(config)
    model.eval()

    path = tmp_path_factory.mktemp("tiny-mlm")
    model.save_pretrained(path)
    fast.save_pretrained(path)
    return str(path)
