"""参数扫描调度: 信号量限制并发的线程工作者"""

import asyncio
from typing import Callable, List, Optional, Sequence, Tuple, TypeVar

from loguru import logger
from tqdm import tqdm

T = TypeVar("T")
R = TypeVar("R")


async def gather_bounded(
    fn: Callable[[T], R],
    items: Sequence[T],
    max_concurrent: int = 4,
    desc: str = "扫描进度",
    show_progress: bool = False,
) -> List[R]:
    """并发执行 fn(item)，结果按输入顺序返回

    每个调用在线程中执行 (numpy/scipy 的线性代数会释放 GIL)。
    """
    semaphore = asyncio.Semaphore(max_concurrent)

    async def run_with_semaphore(index: int, item: T) -> Tuple[int, R]:
        async with semaphore:
            value = await asyncio.to_thread(fn, item)
            return index, value

    tasks = [run_with_semaphore(i, item) for i, item in enumerate(items)]
    results: List[Optional[R]] = [None] * len(items)

    with tqdm(total=len(items), desc=desc, disable=not show_progress) as pbar:
        for coro in asyncio.as_completed(tasks):
            try:
                index, value = await coro
            except Exception as e:
                logger.error(f"扫描任务失败: {e}")
                raise
            results[index] = value
            pbar.update(1)

    return results  # type: ignore[return-value]


def run_sweep(
    fn: Callable[[T], R],
    items: Sequence[T],
    threads: int = 1,
    desc: str = "扫描进度",
    show_progress: bool = False,
) -> List[R]:
    """同步入口；threads == 1 时直接顺序执行"""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    return asyncio.run(gather_bounded(fn, items, threads, desc, show_progress))
