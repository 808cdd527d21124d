"""hdlpoison: data-poisoning backdoor study toolkit for LLM Verilog generation.

Pipeline: mine rare triggers from an HDL corpus, forge poisoned
instruction/code pairs for five trigger mechanisms, assemble a poisoned
fine-tuning dataset, and evaluate backdoored-vs-clean model behavior
(pass@k, attack success rate) with a built-in cycle-based RTL simulator
as the functional oracle.
"""

__version__ = "0.1.0"
