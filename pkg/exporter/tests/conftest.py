import string

import pytest
import torch
from tokenizers import Tokenizer, decoders, models, pre_tokenizers, processors
from transformers import (
    BertConfig,
    BertForMaskedLM,
    GPT2Config,
    GPT2LMHeadModel,
    PreTrainedTokenizerFast,
)


@pytest.fixture(scope="session")
def causal_model_dir(tmp_path_factory):
    """A tiny randomly initialized causal LM over a byte-level vocabulary
    with no merges: every character is its own piece, so all words are
    multi-piece and alignment is exercised hard."""
    d = tmp_path_factory.mktemp("tiny-causal")
    alphabet = sorted(pre_tokenizers.ByteLevel.alphabet())
    vocab = {ch: i for i, ch in enumerate(alphabet)}
    vocab["<|endoftext|>"] = len(vocab)
    tok = Tokenizer(models.BPE(vocab=vocab, merges=[]))
    tok.pre_tokenizer = pre_tokenizers.ByteLevel(add_prefix_space=False)
    tok.decoder = decoders.ByteLevel()
    fast = PreTrainedTokenizerFast(
        tokenizer_object=tok,
        bos_token="<|endoftext|>",
        eos_token="<|endoftext|>",
        unk_token="<|endoftext|>",
    )
    fast.save_pretrained(d)
    torch.manual_seed(1234)
    config = GPT2Config(
        vocab_size=len(vocab),
        n_positions=512,
        n_embd=32,
        n_layer=2,
        n_head=2,
        bos_token_id=vocab["<|endoftext|>"],
        eos_token_id=vocab["<|endoftext|>"],
    )
    GPT2LMHeadModel(config).save_pretrained(d)
    return str(d)


@pytest.fixture(scope="session")
def masked_model_dir(tmp_path_factory):
    """A tiny randomly initialized masked LM over a character wordpiece
    vocabulary (first char bare, continuations ##-prefixed)."""
    d = tmp_path_factory.mktemp("tiny-masked")
    chars = list(string.ascii_letters + string.digits + ".,!?'\"-")
    lines = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"] + chars + ["##" + c for c in chars]
    vocab = {tok: i for i, tok in enumerate(lines)}
    tok = Tokenizer(models.WordPiece(vocab=vocab, unk_token="[UNK]", max_input_chars_per_word=100))
    tok.pre_tokenizer = pre_tokenizers.WhitespaceSplit()
    tok.post_processor = processors.TemplateProcessing(
        single="[CLS] $A [SEP]",
        pair="[CLS] $A [SEP] $B [SEP]",
        special_tokens=[("[CLS]", vocab["[CLS]"]), ("[SEP]", vocab["[SEP]"])],
    )
    fast = PreTrainedTokenizerFast(
        tokenizer_object=tok,
        unk_token="[UNK]",
        pad_token="[PAD]",
        cls_token="[CLS]",
        sep_token="[SEP]",
        mask_token="[MASK]",
    )
    fast.save_pretrained(d)
    torch.manual_seed(1234)
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=128,
    )
    BertForMaskedLM(config).save_pretrained(d)
    return str(d)


@pytest.fixture()
def corpus_tsv(tmp_path):
    path = tmp_path / "corpus.tsv"
    rows = [
        ("d0", 0, ["the", "dog", "ran", "."]),
        ("d0", 1, ["a", "cat", "sat", "still", "."]),
        ("d1", 0, ["word"]),
        ("d1", 1, ["two", "words", "here", "now", "then", "."]),
        ("d1", 2, ["it", "rained", "all", "day", "."]),
    ]
    lines = ["doc_id\tsent_idx\ttok_idx\ttoken"]
    for doc, sent, words in rows:
        for i, w in enumerate(words):
            lines.append(f"{doc}\t{sent}\t{i}\t{w}")
    path.write_text("\n".join(lines) + "\n")
    return str(path)
